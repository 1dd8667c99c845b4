/*
   Copyright 2026 The switchavg Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace switchavg {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidGenerator : public Error {
public:
    using Error::Error;
};

class IrreducibilityError : public Error {
public:
    using Error::Error;
};

class InvalidSpan : public Error {
public:
    using Error::Error;
};

class InvalidStep : public Error {
public:
    using Error::Error;
};

class InvalidBudget : public Error {
public:
    using Error::Error;
};

class InvalidModel : public Error {
public:
    using Error::Error;
};

class InvalidTrajectory : public Error {
public:
    using Error::Error;
};

class InvalidSchedule : public Error {
public:
    using Error::Error;
};

/// A simulated state became non-finite. `replicate` is set by ensemble
/// drivers; single runs leave it at npos.
class BlowupError : public Error {
public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    BlowupError(double time, std::size_t replicate = npos)
        : Error(describe(time, replicate)), time_(time), replicate_(replicate) {}

    double time() const noexcept { return time_; }
    std::size_t replicate() const noexcept { return replicate_; }

    BlowupError with_replicate(std::size_t k) const { return BlowupError(time_, k); }

private:
    static std::string describe(double time, std::size_t replicate) {
        std::string msg = "state became non-finite at t=" + std::to_string(time);
        if (replicate != npos) msg += " (replicate " + std::to_string(replicate) + ")";
        return msg;
    }

    double time_;
    std::size_t replicate_;
};

class NoCycleError : public Error {
public:
    using Error::Error;
};

class ConvergesToEquilibrium : public Error {
public:
    using Error::Error;
};

class GridCoverageError : public Error {
public:
    using Error::Error;
};

class SpecMismatch : public Error {
public:
    using Error::Error;
};

/// Configuration problem; `key()` names the offending configuration key.
class ConfigError : public Error {
public:
    explicit ConfigError(std::string key, const std::string& detail = {})
        : Error(detail.empty() ? "config: " + key : "config: " + key + ": " + detail),
          key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace switchavg

/*
 Copyright 2026 The nugap Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef NUGAP_ERRORS_HPP
#define NUGAP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nugap {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid user input: malformed configs, mismatched sampling times, out-of-range
// frequencies. The CLI maps this to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Frequency response evaluated at (or numerically on top of) a pole.
class SingularityError : public Error {
public:
    SingularityError(const std::string& what, double omega) : Error(what), omega_(omega) {}
    double omega() const noexcept { return omega_; }

private:
    double omega_;
};

// Probe data that cannot produce a response estimate.
class EstimationError : public Error {
public:
    using Error::Error;
};

// Factorization failures, degenerate polynomials, unstable inverses.
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace nugap

#endif // NUGAP_ERRORS_HPP

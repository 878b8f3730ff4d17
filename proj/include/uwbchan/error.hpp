// SPDX-License-Identifier: Apache-2.0
//
// uwbchan - processing and statistical modelling of double-directional channel measurements
// Copyright (C) 2026 The uwbchan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef UWBCHAN_ERROR_HPP
#define UWBCHAN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace uwbchan
{

// Base of every error thrown by the library. The CLI maps the two branches
// below onto distinct exit codes.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Malformed input: bad grids, inconsistent files, violated preconditions.
class ValidationError : public Error
{
public:
    using Error::Error;
};

// The numbers themselves are unusable (zero power, unrealizable targets, ...).
class NumericalError : public Error
{
public:
    using Error::Error;
};

// All delay bins of a profile were excluded; no path gain can be reported.
class OutageError : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

} // namespace uwbchan

#endif

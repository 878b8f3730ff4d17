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

#ifndef UWBCHAN_HPP
#define UWBCHAN_HPP

#include "uwbchan/error.hpp"
#include "uwbchan/types.hpp"
#include "uwbchan/io_util.hpp"
#include "uwbchan/measurement_io.hpp"
#include "uwbchan/pdp.hpp"
#include "uwbchan/directional.hpp"
#include "uwbchan/metrics.hpp"
#include "uwbchan/fitting.hpp"
#include "uwbchan/generator.hpp"
#include "uwbchan/pipeline.hpp"
#include "uwbchan/results_io.hpp"
#include "uwbchan/commands.hpp"

#endif

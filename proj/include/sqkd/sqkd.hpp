// Copyright 2026 The sqkd authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "sqkd/channel.hpp"
#include "sqkd/common.hpp"
#include "sqkd/config.hpp"
#include "sqkd/density_matrix.hpp"
#include "sqkd/flight_state.hpp"
#include "sqkd/gates.hpp"
#include "sqkd/harness.hpp"
#include "sqkd/oracle.hpp"
#include "sqkd/philox.hpp"
#include "sqkd/postproc.hpp"
#include "sqkd/protocol.hpp"
#include "sqkd/qsdc_code.hpp"
#include "sqkd/state_vector.hpp"
#include "sqkd/strategies.hpp"
#include "sqkd/strategy.hpp"
#include "sqkd/transcript.hpp"

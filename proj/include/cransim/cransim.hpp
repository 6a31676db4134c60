// SPDX-License-Identifier: Apache-2.0
//
// cransim - link-level simulator for C-RAN uplink multiuser detection
// Copyright (C) 2026 the cransim authors
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

#pragma once

#include "centralized.hpp"
#include "config.hpp"
#include "distributed.hpp"
#include "experiment.hpp"
#include "mmse.hpp"
#include "network.hpp"
#include "rgmp.hpp"
#include "types.hpp"

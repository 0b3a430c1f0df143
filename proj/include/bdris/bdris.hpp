// SPDX-License-Identifier: Apache-2.0
//
// bdris: sum-rate optimization for BD-RIS assisted multi-UAV RSMA downlinks
// Copyright (C) 2026 The bdris authors
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

#include "bdris/types.hpp"
#include "bdris/scenario.hpp"
#include "bdris/channel.hpp"
#include "bdris/rate_model.hpp"
#include "bdris/manifold.hpp"
#include "bdris/phase_rcg.hpp"
#include "bdris/rsma_precoder.hpp"
#include "bdris/gbd.hpp"
#include "bdris/baselines.hpp"
#include "bdris/experiments.hpp"

/*
 * Copyright 2026 The roe-kg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "roe/config.hpp"
#include "roe/corpus.hpp"
#include "roe/error.hpp"
#include "roe/evalkit.hpp"
#include "roe/kgstore.hpp"
#include "roe/labels.hpp"
#include "roe/miner.hpp"
#include "roe/parallel.hpp"
#include "roe/path.hpp"
#include "roe/policy.hpp"
#include "roe/rewards.hpp"
#include "roe/runtime.hpp"
#include "roe/scoring.hpp"

// Copyright 2026 The gradsim Authors
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

#ifndef GRADSIM_GRADSIM_HPP_
#define GRADSIM_GRADSIM_HPP_

#include "gradsim/distributions.hpp"
#include "gradsim/estimators.hpp"
#include "gradsim/experiment.hpp"
#include "gradsim/models.hpp"
#include "gradsim/rng.hpp"
#include "gradsim/stats.hpp"

#endif  // GRADSIM_GRADSIM_HPP_

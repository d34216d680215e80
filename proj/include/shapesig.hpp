/*
 * Copyright (c) 2026, The shapesig Authors.
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

// Umbrella header.

#pragma once

#include "shapesig/analysis.hpp"
#include "shapesig/chebyshev.hpp"
#include "shapesig/error.hpp"
#include "shapesig/geometry.hpp"
#include "shapesig/hull.hpp"
#include "shapesig/io.hpp"
#include "shapesig/objectives.hpp"
#include "shapesig/parallel.hpp"
#include "shapesig/signature.hpp"

/* Copyright 2026 The floodmap Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include "floodmap/dataset.hpp"
#include "floodmap/error.hpp"
#include "floodmap/fgrid.hpp"
#include "floodmap/indices.hpp"
#include "floodmap/metrics.hpp"
#include "floodmap/parallel.hpp"
#include "floodmap/pipeline.hpp"
#include "floodmap/random.hpp"
#include "floodmap/random_forest.hpp"
#include "floodmap/raster.hpp"
#include "floodmap/scene_synth.hpp"
#include "floodmap/terrain.hpp"

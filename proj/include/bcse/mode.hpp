/* Copyright 2026 The bcse Authors. All Rights Reserved.

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

#ifndef BCSE_MODE_HPP_
#define BCSE_MODE_HPP_

namespace bcse {

// Train mode uses batch statistics and active dropout; eval mode is a
// deterministic per-sample function of the input.
enum class Mode { train, eval };

}  // namespace bcse

#endif  // BCSE_MODE_HPP_

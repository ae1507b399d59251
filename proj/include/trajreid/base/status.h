// Copyright 2026 The trajreid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRAJREID_BASE_STATUS_H_
#define TRAJREID_BASE_STATUS_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define TRAJREID_STATUS_CONCAT_INNER_(a, b) a##b
#define TRAJREID_STATUS_CONCAT_(a, b) TRAJREID_STATUS_CONCAT_INNER_(a, b)

#define TRAJREID_RETURN_IF_ERROR(expr)               \
  do {                                               \
    ::absl::Status trajreid_status_ = (expr);        \
    if (!trajreid_status_.ok()) return trajreid_status_; \
  } while (0)

#define TRAJREID_ASSIGN_OR_RETURN_IMPL_(tmp, lhs, rexpr) \
  auto tmp = (rexpr);                                    \
  if (!tmp.ok()) return tmp.status();                    \
  lhs = std::move(tmp).value()

// Usage: TRAJREID_ASSIGN_OR_RETURN(auto x, MaybeX());
#define TRAJREID_ASSIGN_OR_RETURN(lhs, rexpr) \
  TRAJREID_ASSIGN_OR_RETURN_IMPL_(            \
      TRAJREID_STATUS_CONCAT_(trajreid_statusor_, __LINE__), lhs, rexpr)

#endif  // TRAJREID_BASE_STATUS_H_

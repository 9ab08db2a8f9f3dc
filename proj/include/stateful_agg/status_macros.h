/*
 * Copyright 2026 Google LLC.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef STATEFUL_AGG_STATUS_MACROS_H_
#define STATEFUL_AGG_STATUS_MACROS_H_

#include <utility>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define SA_STATUS_CONCAT_INNER_(a, b) a##b
#define SA_STATUS_CONCAT_(a, b) SA_STATUS_CONCAT_INNER_(a, b)

#define SA_RETURN_IF_ERROR(expr)                 \
  do {                                           \
    ::absl::Status sa_status_ = (expr);          \
    if (!sa_status_.ok()) return sa_status_;     \
  } while (false)

#define SA_ASSIGN_OR_RETURN_IMPL_(tmp, lhs, expr) \
  auto tmp = (expr);                              \
  if (!tmp.ok()) return std::move(tmp).status();  \
  lhs = std::move(tmp).value()

#define SA_ASSIGN_OR_RETURN(lhs, expr) \
  SA_ASSIGN_OR_RETURN_IMPL_(SA_STATUS_CONCAT_(sa_statusor_, __LINE__), lhs, expr)

#endif  // STATEFUL_AGG_STATUS_MACROS_H_

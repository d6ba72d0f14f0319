/*
 * Copyright (C) 2026 The fwhook Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fwhook/error.hpp"

#include <cstdio>

namespace fwhook {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kRange: return "range";
    case ErrorCode::kWriteProtect: return "write-protect";
    case ErrorCode::kOverlap: return "overlap";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kEncode: return "encode";
    case ErrorCode::kDecode: return "decode";
    case ErrorCode::kPlan: return "plan";
    case ErrorCode::kVerify: return "verify";
    case ErrorCode::kSim: return "sim";
  }
  return "unknown";
}

std::string Hex32(std::uint32_t value) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08X", value);
  return buf;
}

std::string Hex(std::uint64_t value) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "0x%llX", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace fwhook

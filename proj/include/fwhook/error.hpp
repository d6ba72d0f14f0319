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

#ifndef FWHOOK_ERROR_HPP_
#define FWHOOK_ERROR_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fwhook {

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kRange,          // access outside a region, or across a region boundary
  kWriteProtect,   // write into a read-only region
  kOverlap,
  kParse,
  kEncode,         // branch out of range, misalignment, unsupported operand
  kDecode,
  kPlan,
  kVerify,
  kSim,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// "0x00180014"
std::string Hex32(std::uint32_t value);
// "0x14"
std::string Hex(std::uint64_t value);

}  // namespace fwhook

#endif  // FWHOOK_ERROR_HPP_

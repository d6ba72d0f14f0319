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

// Hook programs: the straight-line IR the patch sets are written in, and the
// assembler that turns one into position-dependent Thumb code followed by a
// 4-aligned literal pool and its strings.

#ifndef FWHOOK_HOOK_PROGRAM_HPP_
#define FWHOOK_HOOK_PROGRAM_HPP_

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fwhook/firmware_image.hpp"
#include "fwhook/thumb.hpp"

namespace fwhook {

class SymbolMap;

// The hooked function's own k-th parameter (k < 4).
struct ForwardedParam {
  int index = 0;
  bool operator==(const ForwardedParam&) const = default;
};
struct StringLiteral {
  std::string text;
  bool operator==(const StringLiteral&) const = default;
};
struct IntegerLiteral {
  std::uint32_t value = 0;
  bool operator==(const IntegerLiteral&) const = default;
};
using HookArg = std::variant<ForwardedParam, StringLiteral, IntegerLiteral>;

// A call target: a symbol name or an absolute address (trap slots).
using CallTarget = std::variant<std::string, Address>;

struct SaveScratch {
  bool operator==(const SaveScratch&) const = default;
};
struct Call {
  CallTarget target;
  std::vector<HookArg> args;
  bool operator==(const Call&) const = default;
};
// Branch to `target` with the incoming r0-r3 untouched. Only valid without a
// saved frame.
struct TailCall {
  CallTarget target;
  bool operator==(const TailCall&) const = default;
};
struct ReturnLastResult {
  bool operator==(const ReturnLastResult&) const = default;
};
using HookOp = std::variant<SaveScratch, Call, TailCall, ReturnLastResult>;

struct HookProgram {
  std::vector<HookOp> ops;
  bool operator==(const HookProgram&) const = default;
};

// printf("hello world"); return dma_rx(di);
HookProgram HelloWorldProgram();
// Forwards r0-r3 to `trap` and returns what it returns.
HookProgram TrapForwardProgram(Address trap);

struct LiteralWord {
  std::uint32_t offset = 0;  // from stub base
  std::uint32_t value = 0;
  int string_index = -1;     // index into EncodedStub::strings, or -1
  bool operator==(const LiteralWord&) const = default;
};

struct StubString {
  std::uint32_t offset = 0;
  std::string text;          // stored with a trailing NUL
  bool operator==(const StubString&) const = default;
};

struct EncodedStub {
  Address base = 0;
  Bytes code;
  std::vector<thumb::Instr> instructions;
  std::vector<LiteralWord> literal_pool;
  std::vector<StubString> strings;
  std::vector<Address> call_targets;  // one per Call op, program order
  std::uint32_t total_size = 0;

  // code, zero fill up to the pool, pool words, strings.
  Bytes Serialize() const;
};

// Throws kEncode (empty/ill-formed program, >4 args, branch range) or
// kInvalidArgument (unresolved symbol).
EncodedStub AssembleStub(const HookProgram& program, Address base,
                         const SymbolMap& syms);

// Listing of the code followed by ALIGN/DCD/DCB lines for pool and strings.
std::vector<thumb::DisasmLine> DisassembleStub(const EncodedStub& stub,
                                               const SymbolMap* syms);

}  // namespace fwhook

#endif  // FWHOOK_HOOK_PROGRAM_HPP_

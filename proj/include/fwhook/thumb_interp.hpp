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

// Executes the Thumb subset produced by the hook assembler directly out of a
// FirmwareImage. Branches that land on a registered trap address are routed
// to native handlers, which is how generated stubs reach the modeled firmware.

#ifndef FWHOOK_THUMB_INTERP_HPP_
#define FWHOOK_THUMB_INTERP_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fwhook/error.hpp"
#include "fwhook/firmware_image.hpp"
#include "fwhook/thumb.hpp"

namespace fwhook {

// Return-to-caller marker placed in LR on entry; lies outside every region.
inline constexpr Address kReturnSentinel = 0xFFFFFFFE;

class TrapTable {
 public:
  void Register(Address addr, std::string tag);
  const std::string* Find(Address addr) const;
  const std::map<Address, std::string>& entries() const { return entries_; }
  bool Contains(std::string_view tag) const;

 private:
  std::map<Address, std::string> entries_;
};

using TrapArgs = std::array<std::uint32_t, 4>;

class TrapEnv {
 public:
  virtual ~TrapEnv() = default;
  // Runs the native handler for `tag`; the result lands in r0.
  virtual std::uint32_t OnTrap(std::string_view tag, const TrapArgs& args,
                               FirmwareImage& image) = 0;
};

enum class Fault {
  kFuelExhausted,
  kUndecodable,
  kStackOverflow,
  kStackUnderflow,
  kUnmappedTarget,
  kBadMemoryAccess,
  kBadState,
};

const char* FaultName(Fault fault);

class ExecutionFault : public Error {
 public:
  ExecutionFault(Fault fault, Address pc, const std::string& what)
      : Error(ErrorCode::kSim, what), fault_(fault), pc_(pc) {}
  Fault fault() const { return fault_; }
  Address pc() const { return pc_; }

 private:
  Fault fault_;
  Address pc_;
};

struct CpuState {
  std::array<std::uint32_t, 16> r{};  // r13 = sp, r14 = lr, r15 = pc
  bool n = false, z = false, c = false, v = false;

  std::uint32_t sp() const { return r[13]; }
  std::uint32_t lr() const { return r[14]; }
  std::uint32_t pc() const { return r[15]; }
};

struct RegisterDelta {
  int reg;
  std::uint32_t before;
  std::uint32_t after;
  bool operator==(const RegisterDelta&) const = default;
};

struct StepRecord {
  Address address = 0;
  std::optional<thumb::Instr> instr;  // empty when a trap ran instead
  std::string trap;                   // handler tag for trap steps
  std::vector<RegisterDelta> deltas;

  // One trace line: hex address and the disassembled instruction.
  std::string ToString() const;
};

struct InterpConfig {
  std::uint64_t fuel = 10000;
  Address stack_top = 0x10000000;
  std::uint32_t stack_size = 4096;
};

class Interpreter {
 public:
  Interpreter(FirmwareImage& image, const TrapTable& traps, TrapEnv& env,
              InterpConfig config = {});

  // Runs from `entry` with r0-r3 = args until the sentinel return; returns r0.
  std::uint32_t CallStub(Address entry, std::span<const std::uint32_t> args);

  // Prepares the CPU for manual stepping.
  void Reset(Address entry, std::span<const std::uint32_t> args);
  StepRecord Step();
  bool Returned() const { return cpu_.pc() == kReturnSentinel; }

  const CpuState& cpu() const { return cpu_; }
  CpuState& cpu() { return cpu_; }
  Address stack_top() const { return config_.stack_top; }
  Address stack_base() const { return config_.stack_top - config_.stack_size; }
  std::uint32_t ReadStackWord(Address addr) const;

  std::uint64_t instructions_executed() const { return executed_; }
  std::uint64_t traps_taken() const { return traps_taken_; }

  void set_trace(std::function<void(const StepRecord&)> sink) {
    trace_ = std::move(sink);
  }

 private:
  std::uint32_t LoadWord(Address addr) const;
  void Push(std::uint32_t value);
  std::uint32_t Pop();
  void SetNZ(std::uint32_t result);
  void Execute(const thumb::Instr& in, Address pc);

  FirmwareImage& image_;
  const TrapTable& traps_;
  TrapEnv& env_;
  InterpConfig config_;
  CpuState cpu_;
  std::vector<std::uint8_t> stack_;
  std::uint64_t executed_ = 0;
  std::uint64_t traps_taken_ = 0;
  std::function<void(const StepRecord&)> trace_;
};

}  // namespace fwhook

#endif  // FWHOOK_THUMB_INTERP_HPP_

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

#include "fwhook/thumb_interp.hpp"

#include <cstdio>

namespace fwhook {

void TrapTable::Register(Address addr, std::string tag) {
  entries_[addr & ~Address{1}] = std::move(tag);
}

const std::string* TrapTable::Find(Address addr) const {
  auto it = entries_.find(addr);
  return it == entries_.end() ? nullptr : &it->second;
}

bool TrapTable::Contains(std::string_view tag) const {
  for (const auto& [addr, t] : entries_) {
    if (t == tag) return true;
  }
  return false;
}

const char* FaultName(Fault fault) {
  switch (fault) {
    case Fault::kFuelExhausted: return "fuel-exhausted";
    case Fault::kUndecodable: return "undecodable";
    case Fault::kStackOverflow: return "stack-overflow";
    case Fault::kStackUnderflow: return "stack-underflow";
    case Fault::kUnmappedTarget: return "unmapped-target";
    case Fault::kBadMemoryAccess: return "bad-memory-access";
    case Fault::kBadState: return "bad-state";
  }
  return "fault";
}

std::string StepRecord::ToString() const {
  char head[16];
  std::snprintf(head, sizeof(head), "%08X  ", address);
  if (!instr) return head + ("<trap " + trap + ">");
  std::string m = thumb::OpMnemonic(instr->op);
  m.resize(std::max<std::size_t>(m.size() + 1, 8), ' ');
  std::string line = head + m + thumb::FormatOperands(*instr, address);
  while (!line.empty() && line.back() == ' ') line.pop_back();
  return line;
}

Interpreter::Interpreter(FirmwareImage& image, const TrapTable& traps,
                         TrapEnv& env, InterpConfig config)
    : image_(image),
      traps_(traps),
      env_(env),
      config_(config),
      stack_(config.stack_size, 0) {
  if (config_.stack_size % 4 != 0 || config_.stack_top % 4 != 0 ||
      config_.stack_top < config_.stack_size ||
      image_.IsMapped(stack_base(), config_.stack_size)) {
    throw Error(ErrorCode::kInvalidArgument, "bad interpreter stack placement");
  }
}

void Interpreter::Reset(Address entry, std::span<const std::uint32_t> args) {
  if (args.size() > 4) {
    throw Error(ErrorCode::kInvalidArgument, "at most 4 register arguments");
  }
  cpu_ = CpuState{};
  for (std::size_t i = 0; i < args.size(); ++i) cpu_.r[i] = args[i];
  cpu_.r[13] = config_.stack_top;
  cpu_.r[14] = kReturnSentinel | 1;
  cpu_.r[15] = entry & ~Address{1};
  executed_ = 0;
  traps_taken_ = 0;
}

std::uint32_t Interpreter::CallStub(Address entry,
                                    std::span<const std::uint32_t> args) {
  if (config_.fuel == 0) {
    throw Error(ErrorCode::kInvalidArgument, "fuel must be positive");
  }
  Reset(entry, args);
  while (!Returned()) Step();
  return cpu_.r[0];
}

std::uint32_t Interpreter::ReadStackWord(Address addr) const {
  if (addr < stack_base() || std::uint64_t{addr} + 4 > config_.stack_top) {
    throw ExecutionFault(Fault::kBadMemoryAccess, cpu_.pc(),
                         "stack read at " + Hex32(addr));
  }
  std::size_t off = addr - stack_base();
  return std::uint32_t{stack_[off]} | std::uint32_t{stack_[off + 1]} << 8 |
         std::uint32_t{stack_[off + 2]} << 16 |
         std::uint32_t{stack_[off + 3]} << 24;
}

std::uint32_t Interpreter::LoadWord(Address addr) const {
  if (addr >= stack_base() && std::uint64_t{addr} + 4 <= config_.stack_top) {
    return ReadStackWord(addr);
  }
  if (!image_.IsMapped(addr, 4)) {
    throw ExecutionFault(Fault::kBadMemoryAccess, cpu_.pc(),
                         "load from unmapped " + Hex32(addr) + " at pc " +
                             Hex32(cpu_.pc()));
  }
  return image_.ReadWord(addr);
}

void Interpreter::Push(std::uint32_t value) {
  if (cpu_.r[13] < stack_base() + 4) {
    throw ExecutionFault(Fault::kStackOverflow, cpu_.pc(),
                         "stack overflow at pc " + Hex32(cpu_.pc()));
  }
  cpu_.r[13] -= 4;
  std::size_t off = cpu_.r[13] - stack_base();
  for (int i = 0; i < 4; ++i) {
    stack_[off + i] = static_cast<std::uint8_t>(value >> (8 * i));
  }
}

std::uint32_t Interpreter::Pop() {
  if (std::uint64_t{cpu_.r[13]} + 4 > config_.stack_top) {
    throw ExecutionFault(Fault::kStackUnderflow, cpu_.pc(),
                         "stack underflow at pc " + Hex32(cpu_.pc()));
  }
  std::uint32_t v = ReadStackWord(cpu_.r[13]);
  cpu_.r[13] += 4;
  return v;
}

void Interpreter::SetNZ(std::uint32_t result) {
  cpu_.n = (result >> 31) != 0;
  cpu_.z = result == 0;
}

StepRecord Interpreter::Step() {
  const Address pc = cpu_.pc();
  const auto before = cpu_.r;
  StepRecord rec;
  rec.address = pc;

  if (const std::string* tag = traps_.Find(pc)) {
    TrapArgs args = {cpu_.r[0], cpu_.r[1], cpu_.r[2], cpu_.r[3]};
    cpu_.r[0] = env_.OnTrap(*tag, args, image_);
    if ((cpu_.lr() & 1) == 0) {
      throw ExecutionFault(Fault::kBadState, pc,
                           "trap " + *tag + " returning to ARM-mode address " +
                               Hex32(cpu_.lr()));
    }
    cpu_.r[15] = cpu_.lr() & ~std::uint32_t{1};
    rec.trap = *tag;
    ++traps_taken_;
  } else {
    if (executed_ >= config_.fuel) {
      throw ExecutionFault(Fault::kFuelExhausted, pc,
                           "fuel exhausted after " + std::to_string(executed_) +
                               " instructions at " + Hex32(pc));
    }
    if (!image_.IsMapped(pc, 2)) {
      throw ExecutionFault(Fault::kUnmappedTarget, pc,
                           "execution reached unmapped, untrapped " + Hex32(pc));
    }
    const MemoryRegion* region = image_.RegionFor(pc, 2);
    std::uint32_t avail =
        static_cast<std::uint32_t>(std::min<std::uint64_t>(4, region->end() - pc));
    Bytes raw = image_.ReadBytes(pc, avail);
    auto in = thumb::Decode(raw);
    if (!in) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "undecodable halfword 0x%04X at ",
                    raw[0] | raw[1] << 8);
      throw ExecutionFault(Fault::kUndecodable, pc, buf + Hex32(pc));
    }
    ++executed_;
    Execute(*in, pc);
    rec.instr = in;
  }

  for (int r = 0; r < 16; ++r) {
    if (before[r] != cpu_.r[r]) rec.deltas.push_back({r, before[r], cpu_.r[r]});
  }
  if (trace_) trace_(rec);
  return rec;
}

void Interpreter::Execute(const thumb::Instr& in, Address pc) {
  using thumb::Op;
  Address next = pc + static_cast<Address>(in.width());
  auto& r = cpu_.r;
  switch (in.op) {
    case Op::kPush:
      // Highest register at the highest address.
      for (int i = 15; i >= 0; --i) {
        if (in.reg_list & (1u << i)) Push(r[i]);
      }
      break;
    case Op::kPop:
      for (int i = 0; i < 16; ++i) {
        if (!(in.reg_list & (1u << i))) continue;
        std::uint32_t v = Pop();
        if (i == thumb::kPc) {
          if ((v & 1) == 0) {
            throw ExecutionFault(Fault::kBadState, pc,
                                 "POP {PC} to ARM-mode address " + Hex32(v));
          }
          next = v & ~std::uint32_t{1};
        } else {
          r[i] = v;
        }
      }
      break;
    case Op::kMovsReg:
      r[in.rd] = r[in.rm];
      SetNZ(r[in.rd]);
      break;
    case Op::kMovsImm:
      r[in.rd] = static_cast<std::uint32_t>(in.imm);
      SetNZ(r[in.rd]);
      break;
    case Op::kMov:
      r[in.rd] = in.rm == thumb::kPc ? pc + 4 : r[in.rm];
      break;
    case Op::kLdrLiteral:
      r[in.rd] = LoadWord(thumb::LiteralAddress(in, pc));
      break;
    case Op::kAddsImm: {
      std::uint32_t a = r[in.rd];
      std::uint32_t b = static_cast<std::uint32_t>(in.imm);
      std::uint32_t res = a + b;
      cpu_.c = res < a;
      cpu_.v = ((~(a ^ b) & (a ^ res)) >> 31) != 0;
      r[in.rd] = res;
      SetNZ(res);
      break;
    }
    case Op::kSubsImm: {
      std::uint32_t a = r[in.rd];
      std::uint32_t b = static_cast<std::uint32_t>(in.imm);
      std::uint32_t res = a - b;
      cpu_.c = a >= b;
      cpu_.v = (((a ^ b) & (a ^ res)) >> 31) != 0;
      r[in.rd] = res;
      SetNZ(res);
      break;
    }
    case Op::kBl:
      r[thumb::kLr] = next | 1;
      next = thumb::BranchTarget(in, pc);
      break;
    case Op::kBW:
      next = thumb::BranchTarget(in, pc);
      break;
    case Op::kBxLr:
      if ((r[thumb::kLr] & 1) == 0) {
        throw ExecutionFault(Fault::kBadState, pc,
                             "BX LR to ARM-mode address " + Hex32(r[thumb::kLr]));
      }
      next = r[thumb::kLr] & ~std::uint32_t{1};
      break;
    case Op::kNop:
      break;
  }
  r[15] = next;
}

}  // namespace fwhook

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

#include "fwhook/hook_program.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>

#include "fwhook/error.hpp"
#include "fwhook/symbol_map.hpp"

namespace fwhook {

HookProgram HelloWorldProgram() {
  return {{SaveScratch{},
           Call{std::string("printf"), {StringLiteral{"hello world"}}},
           Call{std::string("dma_rx"), {ForwardedParam{0}}},
           ReturnLastResult{}}};
}

HookProgram TrapForwardProgram(Address trap) {
  return {{SaveScratch{},
           Call{trap,
                {ForwardedParam{0}, ForwardedParam{1}, ForwardedParam{2},
                 ForwardedParam{3}}},
           ReturnLastResult{}}};
}

Bytes EncodedStub::Serialize() const {
  Bytes out(total_size, 0);
  std::copy(code.begin(), code.end(), out.begin());
  for (const auto& w : literal_pool) {
    for (int i = 0; i < 4; ++i) {
      out[w.offset + i] = static_cast<std::uint8_t>(w.value >> (8 * i));
    }
  }
  for (const auto& s : strings) {
    std::copy(s.text.begin(), s.text.end(), out.begin() + s.offset);
  }
  return out;
}

namespace {

using thumb::Instr;

struct PendingInstr {
  PendingInstr(Instr i, int pool = -1, std::optional<Address> branch = {})
      : instr(i), pool_index(pool), branch_to(branch) {}

  Instr instr;
  int pool_index;                     // LDR literal slot
  std::optional<Address> branch_to;   // BL / B.W target
};

struct PoolSlot {
  std::uint32_t value = 0;  // integer literal value; strings are resolved later
  int string_index = -1;
};

Address Resolve(const CallTarget& target, const SymbolMap& syms) {
  if (const auto* addr = std::get_if<Address>(&target)) return *addr;
  return syms.Require(std::get<std::string>(target));
}

std::string TargetName(const CallTarget& target) {
  if (const auto* addr = std::get_if<Address>(&target)) return Hex32(*addr);
  return std::get<std::string>(target);
}

[[noreturn]] void Fail(const std::string& what) {
  throw Error(ErrorCode::kEncode, "hook program: " + what);
}

std::uint32_t AlignUp4(std::uint64_t v) {
  return static_cast<std::uint32_t>((v + 3) & ~std::uint64_t{3});
}

}  // namespace

EncodedStub AssembleStub(const HookProgram& program, Address base,
                         const SymbolMap& syms) {
  const auto& ops = program.ops;
  if (ops.empty()) Fail("empty program");
  if (base & 1) Fail("base " + Hex32(base) + " is not halfword-aligned");

  const bool has_frame = std::holds_alternative<SaveScratch>(ops.front());
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const HookOp& op = ops[i];
    bool terminal = std::holds_alternative<ReturnLastResult>(op) ||
                    std::holds_alternative<TailCall>(op);
    if (terminal != (i + 1 == ops.size())) {
      Fail(terminal ? "return before the last op"
                    : "program must end with return_last_result or tail_call");
    }
    if (std::holds_alternative<SaveScratch>(op) && i != 0) {
      Fail("save_scratch must be the first op");
    }
    if (std::holds_alternative<Call>(op) && !has_frame) {
      Fail("call without save_scratch would lose the return address");
    }
    if (std::holds_alternative<TailCall>(op) && has_frame) {
      Fail("tail_call cannot unwind a saved frame");
    }
    if (const auto* call = std::get_if<Call>(&op)) {
      if (call->args.size() > 4) {
        Fail("call to " + TargetName(call->target) + " has " +
             std::to_string(call->args.size()) + " arguments (max 4)");
      }
    }
  }

  // Forwarded parameters live in R4.. for the whole body.
  std::vector<int> saved;
  for (const auto& op : ops) {
    if (const auto* call = std::get_if<Call>(&op)) {
      for (const auto& arg : call->args) {
        if (const auto* fp = std::get_if<ForwardedParam>(&arg)) {
          if (fp->index < 0 || fp->index > 3) {
            Fail("forwarded parameter " + std::to_string(fp->index) +
                 " is not register-passed");
          }
          if (std::find(saved.begin(), saved.end(), fp->index) == saved.end()) {
            saved.push_back(fp->index);
          }
        }
      }
    }
  }
  std::sort(saved.begin(), saved.end());
  auto saved_reg = [&](int param) {
    return 4 + static_cast<int>(std::find(saved.begin(), saved.end(), param) -
                                saved.begin());
  };
  const int frame_regs = std::max<int>(1, static_cast<int>(saved.size()));
  std::uint16_t low_list = 0;
  for (int r = 4; r < 4 + frame_regs; ++r) low_list |= std::uint16_t(1u << r);

  std::vector<PendingInstr> body;
  std::vector<PoolSlot> pool;
  std::vector<std::string> strings;
  std::map<std::string, int> string_slots;
  std::map<std::uint32_t, int> integer_slots;
  std::vector<Address> call_targets;

  auto string_slot = [&](const std::string& text) {
    auto it = string_slots.find(text);
    if (it != string_slots.end()) return it->second;
    strings.push_back(text);
    pool.push_back({0, static_cast<int>(strings.size()) - 1});
    int slot = static_cast<int>(pool.size()) - 1;
    string_slots.emplace(text, slot);
    return slot;
  };
  auto integer_slot = [&](std::uint32_t value) {
    auto it = integer_slots.find(value);
    if (it != integer_slots.end()) return it->second;
    pool.push_back({value, -1});
    int slot = static_cast<int>(pool.size()) - 1;
    integer_slots.emplace(value, slot);
    return slot;
  };

  for (const auto& op : ops) {
    if (std::holds_alternative<SaveScratch>(op)) {
      body.emplace_back(thumb::Push(low_list | std::uint16_t(1u << thumb::kLr)));
      for (int param : saved) {
        body.emplace_back(thumb::MovsReg(saved_reg(param), param));
      }
    } else if (const auto* call = std::get_if<Call>(&op)) {
      for (std::size_t i = 0; i < call->args.size(); ++i) {
        const int rd = static_cast<int>(i);
        const HookArg& arg = call->args[i];
        if (const auto* fp = std::get_if<ForwardedParam>(&arg)) {
          body.emplace_back(thumb::MovsReg(rd, saved_reg(fp->index)));
        } else if (const auto* s = std::get_if<StringLiteral>(&arg)) {
          body.emplace_back(thumb::LdrLiteral(rd, 0), string_slot(s->text));
        } else {
          std::uint32_t v = std::get<IntegerLiteral>(arg).value;
          if (v <= 255) {
            body.emplace_back(thumb::MovsImm(rd, static_cast<std::uint8_t>(v)));
          } else if (v <= 510) {
            body.emplace_back(thumb::MovsImm(rd, 255));
            body.emplace_back(thumb::AddsImm(rd, static_cast<std::uint8_t>(v - 255)));
          } else {
            body.emplace_back(thumb::LdrLiteral(rd, 0), integer_slot(v));
          }
        }
      }
      Address target = Resolve(call->target, syms);
      call_targets.push_back(target);
      body.emplace_back(Instr{.op = thumb::Op::kBl}, -1, target);
    } else if (const auto* tail = std::get_if<TailCall>(&op)) {
      body.emplace_back(Instr{.op = thumb::Op::kBW}, -1, Resolve(tail->target, syms));
    } else {
      if (has_frame) {
        body.emplace_back(thumb::Pop(low_list | std::uint16_t(1u << thumb::kPc)));
      } else {
        body.emplace_back(thumb::BxLr());
      }
    }
  }

  EncodedStub stub;
  stub.base = base;
  stub.call_targets = std::move(call_targets);

  std::uint32_t code_size = 0;
  for (const auto& p : body) code_size += static_cast<std::uint32_t>(p.instr.width());
  const std::uint32_t pool_offset =
      pool.empty() ? code_size : AlignUp4(std::uint64_t{base} + code_size) - base;
  std::uint32_t cursor = pool_offset + 4 * static_cast<std::uint32_t>(pool.size());
  for (const auto& text : strings) {
    stub.strings.push_back({cursor, text + '\0'});
    cursor += static_cast<std::uint32_t>(text.size() + 1);
  }
  stub.total_size = cursor;
  if (std::uint64_t{base} + stub.total_size > 0x100000000ull) {
    Fail("stub does not fit below 4 GiB");
  }
  for (std::size_t i = 0; i < pool.size(); ++i) {
    LiteralWord word;
    word.offset = pool_offset + 4 * static_cast<std::uint32_t>(i);
    word.string_index = pool[i].string_index;
    word.value = pool[i].string_index >= 0
                     ? base + stub.strings[pool[i].string_index].offset
                     : pool[i].value;
    stub.literal_pool.push_back(word);
  }

  Address pc = base;
  for (auto& p : body) {
    Instr in = p.instr;
    if (p.pool_index >= 0) {
      Address lit = base + stub.literal_pool[p.pool_index].offset;
      in.imm = static_cast<std::int32_t>(lit - ((pc + 4) & ~Address{3}));
      if (in.imm > 1020) Fail("literal pool out of LDR reach");
    }
    if (p.branch_to) {
      try {
        auto b = in.op == thumb::Op::kBl ? thumb::EncodeBl(pc, *p.branch_to)
                                         : thumb::EncodeBw(pc, *p.branch_to);
        stub.code.insert(stub.code.end(), b.begin(), b.end());
        in = *thumb::Decode(b);
      } catch (const Error& e) {
        Fail(std::string("branch at ") + Hex32(pc) + " to " +
             Hex32(*p.branch_to) + ": " + e.what());
      }
    } else {
      Bytes enc = thumb::Encode(in);
      stub.code.insert(stub.code.end(), enc.begin(), enc.end());
    }
    stub.instructions.push_back(in);
    pc += static_cast<Address>(in.width());
  }
  return stub;
}

std::vector<thumb::DisasmLine> DisassembleStub(const EncodedStub& stub,
                                               const SymbolMap* syms) {
  Bytes bytes = stub.Serialize();
  auto lines = thumb::Disassemble(bytes, stub.base, syms,
                                  stub.instructions.size());
  char buf[96];
  const std::uint32_t code_end = static_cast<std::uint32_t>(stub.code.size());
  if (!stub.literal_pool.empty() && stub.literal_pool.front().offset > code_end) {
    thumb::DisasmLine align;
    align.address = stub.base + code_end;
    align.raw.assign(bytes.begin() + code_end,
                     bytes.begin() + stub.literal_pool.front().offset);
    align.mnemonic = "ALIGN";
    align.operands = "4";
    lines.push_back(std::move(align));
  }
  for (const auto& w : stub.literal_pool) {
    thumb::DisasmLine line;
    line.address = stub.base + w.offset;
    line.raw.assign(bytes.begin() + w.offset, bytes.begin() + w.offset + 4);
    line.mnemonic = "DCD";
    std::snprintf(buf, sizeof(buf), "0x%08X", w.value);
    line.operands = buf;
    if (w.string_index >= 0) {
      const std::string& t = stub.strings[w.string_index].text;
      line.comment = "\"" + t.substr(0, t.size() - 1) + "\"";
    }
    lines.push_back(std::move(line));
  }
  for (const auto& s : stub.strings) {
    thumb::DisasmLine line;
    line.address = stub.base + s.offset;
    line.raw.assign(s.text.begin(), s.text.end());
    line.mnemonic = "DCB";
    line.operands = "\"" + s.text.substr(0, s.text.size() - 1) + "\",0";
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace fwhook

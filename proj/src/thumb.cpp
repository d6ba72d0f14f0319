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

#include "fwhook/thumb.hpp"

#include <cstdio>

#include "fwhook/error.hpp"
#include "fwhook/symbol_map.hpp"

namespace fwhook::thumb {

namespace {

void CheckLowReg(int reg, const char* what) {
  if (reg < 0 || reg > 7) {
    throw Error(ErrorCode::kEncode,
                std::string(what) + ": register R" + std::to_string(reg) +
                    " is not a low register");
  }
}

Bytes Half(std::uint16_t hw) {
  return {static_cast<std::uint8_t>(hw), static_cast<std::uint8_t>(hw >> 8)};
}

std::uint16_t ReadHalf(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | b[at + 1] << 8);
}

// BL and B.W share the T4 offset layout; only hw2 bit 14 differs.
std::array<std::uint8_t, 4> EncodeBranch32(std::int64_t offset, bool link) {
  if (offset & 1) {
    throw Error(ErrorCode::kEncode,
                "branch offset " + std::to_string(offset) + " is odd");
  }
  if (offset < kBranchMin || offset > kBranchMax) {
    throw Error(ErrorCode::kEncode,
                "branch offset " + std::to_string(offset) +
                    " outside +/-16 MiB");
  }
  auto imm = static_cast<std::uint32_t>(offset) & 0x1FFFFFF;
  std::uint32_t s = (imm >> 24) & 1;
  std::uint32_t i1 = (imm >> 23) & 1;
  std::uint32_t i2 = (imm >> 22) & 1;
  std::uint32_t j1 = (~(i1 ^ s)) & 1;
  std::uint32_t j2 = (~(i2 ^ s)) & 1;
  auto hw1 = static_cast<std::uint16_t>(0xF000 | s << 10 | ((imm >> 12) & 0x3FF));
  auto hw2 = static_cast<std::uint16_t>((link ? 0xD000 : 0x9000) | j1 << 13 |
                                        j2 << 11 | ((imm >> 1) & 0x7FF));
  return {static_cast<std::uint8_t>(hw1), static_cast<std::uint8_t>(hw1 >> 8),
          static_cast<std::uint8_t>(hw2), static_cast<std::uint8_t>(hw2 >> 8)};
}

std::int32_t DecodeBranch32Offset(std::uint16_t hw1, std::uint16_t hw2) {
  std::uint32_t s = (hw1 >> 10) & 1;
  std::uint32_t j1 = (hw2 >> 13) & 1;
  std::uint32_t j2 = (hw2 >> 11) & 1;
  std::uint32_t i1 = (~(j1 ^ s)) & 1;
  std::uint32_t i2 = (~(j2 ^ s)) & 1;
  std::uint32_t imm = s << 24 | i1 << 23 | i2 << 22 | (hw1 & 0x3FFu) << 12 |
                      (hw2 & 0x7FFu) << 1;
  // Sign-extend from bit 24.
  return static_cast<std::int32_t>(imm << 7) >> 7;
}

void CheckHalfAligned(Address a, const char* what) {
  if (a & 1) {
    throw Error(ErrorCode::kEncode,
                std::string(what) + " " + Hex32(a) + " is not halfword-aligned");
  }
}

}  // namespace

const char* OpMnemonic(Op op) {
  switch (op) {
    case Op::kPush: return "PUSH";
    case Op::kPop: return "POP";
    case Op::kMovsReg:
    case Op::kMovsImm: return "MOVS";
    case Op::kMov: return "MOV";
    case Op::kLdrLiteral: return "LDR";
    case Op::kBl: return "BL";
    case Op::kBW: return "B.W";
    case Op::kBxLr: return "BX";
    case Op::kAddsImm: return "ADDS";
    case Op::kSubsImm: return "SUBS";
    case Op::kNop: return "NOP";
  }
  return "?";
}

Instr Push(std::uint16_t reg_list) { return {.op = Op::kPush, .reg_list = reg_list}; }
Instr Pop(std::uint16_t reg_list) { return {.op = Op::kPop, .reg_list = reg_list}; }
Instr MovsReg(int rd, int rm) { return {.op = Op::kMovsReg, .rd = rd, .rm = rm}; }
Instr MovsImm(int rd, std::uint8_t imm) {
  return {.op = Op::kMovsImm, .rd = rd, .imm = imm};
}
Instr Mov(int rd, int rm) { return {.op = Op::kMov, .rd = rd, .rm = rm}; }
Instr LdrLiteral(int rt, std::int32_t byte_offset) {
  return {.op = Op::kLdrLiteral, .rd = rt, .imm = byte_offset};
}
Instr AddsImm(int rdn, std::uint8_t imm) {
  return {.op = Op::kAddsImm, .rd = rdn, .imm = imm};
}
Instr SubsImm(int rdn, std::uint8_t imm) {
  return {.op = Op::kSubsImm, .rd = rdn, .imm = imm};
}
Instr BxLr() { return {.op = Op::kBxLr, .rm = kLr}; }
Instr Nop() { return {.op = Op::kNop}; }

Bytes Encode(const Instr& in) {
  switch (in.op) {
    case Op::kPush: {
      if (in.reg_list & ~0x40FFu || (in.reg_list & 0x40FFu) == 0) {
        throw Error(ErrorCode::kEncode, "PUSH takes R0-R7 and LR");
      }
      std::uint16_t m = (in.reg_list >> kLr) & 1;
      return Half(static_cast<std::uint16_t>(0xB400 | m << 8 | (in.reg_list & 0xFF)));
    }
    case Op::kPop: {
      if (in.reg_list & ~0x80FFu || (in.reg_list & 0x80FFu) == 0) {
        throw Error(ErrorCode::kEncode, "POP takes R0-R7 and PC");
      }
      std::uint16_t p = (in.reg_list >> kPc) & 1;
      return Half(static_cast<std::uint16_t>(0xBC00 | p << 8 | (in.reg_list & 0xFF)));
    }
    case Op::kMovsReg:
      CheckLowReg(in.rd, "MOVS");
      CheckLowReg(in.rm, "MOVS");
      if (in.rd == in.rm) {
        throw Error(ErrorCode::kEncode, "MOVS Rd, Rm needs distinct registers");
      }
      return Half(static_cast<std::uint16_t>(in.rm << 3 | in.rd));
    case Op::kMovsImm:
    case Op::kAddsImm:
    case Op::kSubsImm: {
      CheckLowReg(in.rd, OpMnemonic(in.op));
      if (in.imm < 0 || in.imm > 255) {
        throw Error(ErrorCode::kEncode, std::string(OpMnemonic(in.op)) +
                                            " immediate out of range");
      }
      std::uint16_t base = in.op == Op::kMovsImm   ? 0x2000
                           : in.op == Op::kAddsImm ? 0x3000
                                                   : 0x3800;
      return Half(static_cast<std::uint16_t>(base | in.rd << 8 | in.imm));
    }
    case Op::kMov:
      if (in.rd < 0 || in.rd > 15 || in.rm < 0 || in.rm > 15 || in.rd == kPc) {
        throw Error(ErrorCode::kEncode, "MOV register out of range");
      }
      return Half(static_cast<std::uint16_t>(0x4600 | (in.rd & 8) << 4 |
                                             in.rm << 3 | (in.rd & 7)));
    case Op::kLdrLiteral:
      CheckLowReg(in.rd, "LDR");
      if (in.imm < 0 || in.imm > 1020 || in.imm % 4 != 0) {
        throw Error(ErrorCode::kEncode,
                    "LDR literal offset " + std::to_string(in.imm) +
                        " not a multiple of 4 in [0, 1020]");
      }
      return Half(static_cast<std::uint16_t>(0x4800 | in.rd << 8 | in.imm / 4));
    case Op::kBl:
    case Op::kBW: {
      auto b = EncodeBranch32(in.imm, in.op == Op::kBl);
      return Bytes(b.begin(), b.end());
    }
    case Op::kBxLr:
      return Half(0x4770);
    case Op::kNop:
      return Half(0xBF00);
  }
  throw Error(ErrorCode::kEncode, "unknown op");
}

std::optional<Instr> Decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2) return std::nullopt;
  std::uint16_t hw = ReadHalf(bytes, 0);
  if ((hw & 0xF800) == 0xF000) {
    if (bytes.size() < 4) return std::nullopt;
    std::uint16_t hw2 = ReadHalf(bytes, 2);
    if ((hw2 & 0xD000) == 0xD000) {
      return Instr{.op = Op::kBl, .imm = DecodeBranch32Offset(hw, hw2)};
    }
    if ((hw2 & 0xD000) == 0x9000) {
      return Instr{.op = Op::kBW, .imm = DecodeBranch32Offset(hw, hw2)};
    }
    return std::nullopt;
  }
  if ((hw & 0xFE00) == 0xB400) {
    auto list = static_cast<std::uint16_t>((hw & 0xFF) | ((hw >> 8) & 1) << kLr);
    if (list == 0) return std::nullopt;
    return Push(list);
  }
  if ((hw & 0xFE00) == 0xBC00) {
    auto list = static_cast<std::uint16_t>((hw & 0xFF) | ((hw >> 8) & 1) << kPc);
    if (list == 0) return std::nullopt;
    return Pop(list);
  }
  if ((hw & 0xFFC0) == 0x0000) {
    int rd = hw & 7;
    int rm = (hw >> 3) & 7;
    // 0x0000 (MOVS R0, R0) is what unwritten memory looks like; keep it data.
    if (rd == rm) return std::nullopt;
    return MovsReg(rd, rm);
  }
  if ((hw & 0xF800) == 0x2000) return MovsImm((hw >> 8) & 7, hw & 0xFF);
  if ((hw & 0xF800) == 0x3000) return AddsImm((hw >> 8) & 7, hw & 0xFF);
  if ((hw & 0xF800) == 0x3800) return SubsImm((hw >> 8) & 7, hw & 0xFF);
  if ((hw & 0xF800) == 0x4800) return LdrLiteral((hw >> 8) & 7, (hw & 0xFF) * 4);
  if (hw == 0x4770) return BxLr();
  if ((hw & 0xFF00) == 0x4600) {
    int rd = (hw & 7) | ((hw >> 4) & 8);
    if (rd == kPc) return std::nullopt;
    return Mov(rd, (hw >> 3) & 0xF);
  }
  if (hw == 0xBF00) return Nop();
  return std::nullopt;
}

std::array<std::uint8_t, 4> EncodeBl(Address pc, Address target) {
  CheckHalfAligned(pc, "pc");
  CheckHalfAligned(target, "branch target");
  return EncodeBranch32(std::int64_t{target} - (std::int64_t{pc} + 4), true);
}

std::array<std::uint8_t, 4> EncodeBw(Address pc, Address target) {
  CheckHalfAligned(pc, "pc");
  CheckHalfAligned(target, "branch target");
  return EncodeBranch32(std::int64_t{target} - (std::int64_t{pc} + 4), false);
}

Address DecodeBl(std::span<const std::uint8_t> bytes, Address pc) {
  auto in = Decode(bytes);
  if (!in || in->op != Op::kBl) {
    throw Error(ErrorCode::kDecode, "no BL encoding at " + Hex32(pc));
  }
  return BranchTarget(*in, pc);
}

Address DecodeBw(std::span<const std::uint8_t> bytes, Address pc) {
  auto in = Decode(bytes);
  if (!in || in->op != Op::kBW) {
    throw Error(ErrorCode::kDecode, "no B.W encoding at " + Hex32(pc));
  }
  return BranchTarget(*in, pc);
}

Address BranchTarget(const Instr& instr, Address pc) {
  return static_cast<Address>(std::int64_t{pc} + 4 + instr.imm);
}

Address LiteralAddress(const Instr& instr, Address pc) {
  return ((pc + 4) & ~Address{3}) + static_cast<Address>(instr.imm);
}

std::string RegisterName(int reg) {
  switch (reg) {
    case 13: return "SP";
    case kLr: return "LR";
    case kPc: return "PC";
    default: return "R" + std::to_string(reg);
  }
}

std::string FormatRegList(std::uint16_t reg_list) {
  std::string out = "{";
  bool first = true;
  for (int r = 0; r < 16; ++r) {
    if (!(reg_list & (1u << r))) continue;
    // Collapse runs of three or more consecutive low registers: R4-R7.
    int end = r;
    while (end + 1 < 8 && (reg_list & (1u << (end + 1)))) ++end;
    if (!first) out += ",";
    first = false;
    if (end - r >= 2) {
      out += RegisterName(r) + "-" + RegisterName(end);
      r = end;
    } else {
      out += RegisterName(r);
    }
  }
  return out + "}";
}

std::string FormatOperands(const Instr& in, Address pc) {
  char buf[48];
  switch (in.op) {
    case Op::kPush:
    case Op::kPop:
      return FormatRegList(in.reg_list);
    case Op::kMovsReg:
    case Op::kMov:
      return RegisterName(in.rd) + ", " + RegisterName(in.rm);
    case Op::kMovsImm:
    case Op::kAddsImm:
    case Op::kSubsImm:
      return RegisterName(in.rd) + ", #" + std::to_string(in.imm);
    case Op::kLdrLiteral:
      std::snprintf(buf, sizeof(buf), "[PC,#0x%X]", static_cast<unsigned>(in.imm));
      return RegisterName(in.rd) + ", " + buf;
    case Op::kBl:
    case Op::kBW:
      std::snprintf(buf, sizeof(buf), "0x%X", BranchTarget(in, pc));
      return buf;
    case Op::kBxLr:
      return "LR";
    case Op::kNop:
      return "";
  }
  return "";
}

std::string DisasmLine::ToString() const {
  char head[32];
  std::snprintf(head, sizeof(head), "%08X  ", address);
  std::string out = head;
  std::string m = mnemonic;
  m.resize(std::max<std::size_t>(m.size() + 1, 8), ' ');
  out += m + operands;
  if (!comment.empty()) out += " ; " + comment;
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

namespace {

// Printable zero-terminated string at `offset`, if there is one.
std::optional<std::string> StringAt(std::span<const std::uint8_t> bytes,
                                    std::size_t offset) {
  std::string s;
  for (std::size_t i = offset; i < bytes.size(); ++i) {
    if (bytes[i] == 0) {
      if (s.empty()) return std::nullopt;
      return s;
    }
    if (bytes[i] < 0x20 || bytes[i] >= 0x7f) return std::nullopt;
    s += static_cast<char>(bytes[i]);
  }
  return std::nullopt;
}

void Annotate(DisasmLine& line, std::span<const std::uint8_t> bytes,
              Address base, const SymbolMap* syms) {
  const Instr& in = *line.instr;
  if ((in.op == Op::kBl || in.op == Op::kBW) && syms != nullptr) {
    if (auto sym = syms->ReverseLookup(BranchTarget(in, line.address))) {
      line.comment = sym->name;
    }
  }
  if (in.op == Op::kLdrLiteral) {
    Address lit = LiteralAddress(in, line.address);
    if (lit >= base && std::uint64_t{lit} + 4 <= std::uint64_t{base} + bytes.size()) {
      std::size_t off = lit - base;
      std::uint32_t word = bytes[off] | bytes[off + 1] << 8 |
                           bytes[off + 2] << 16 |
                           static_cast<std::uint32_t>(bytes[off + 3]) << 24;
      char buf[24];
      std::snprintf(buf, sizeof(buf), "=0x%08X", word);
      line.operands = RegisterName(in.rd) + ", " + buf;
      if (word >= base && word < base + bytes.size()) {
        if (auto s = StringAt(bytes, word - base)) {
          line.comment = "\"" + *s + "\"";
        }
      }
    }
  }
}

}  // namespace

std::vector<DisasmLine> Disassemble(std::span<const std::uint8_t> bytes,
                                    Address base, const SymbolMap* syms,
                                    std::size_t max_instructions) {
  std::vector<DisasmLine> lines;
  std::size_t off = 0;
  while (off < bytes.size() &&
         (max_instructions == 0 || lines.size() < max_instructions)) {
    DisasmLine line;
    line.address = base + static_cast<Address>(off);
    auto in = Decode(bytes.subspan(off));
    if (in) {
      line.instr = in;
      line.raw.assign(bytes.begin() + off, bytes.begin() + off + in->width());
      line.mnemonic = OpMnemonic(in->op);
      line.operands = FormatOperands(*in, line.address);
      Annotate(line, bytes, base, syms);
      off += in->width();
    } else if (off + 2 <= bytes.size()) {
      line.raw.assign(bytes.begin() + off, bytes.begin() + off + 2);
      char buf[16];
      std::snprintf(buf, sizeof(buf), "0x%04X", ReadHalf(bytes, off));
      line.mnemonic = "DCW";
      line.operands = buf;
      off += 2;
    } else {
      line.raw = {bytes[off]};
      char buf[16];
      std::snprintf(buf, sizeof(buf), "0x%02X", bytes[off]);
      line.mnemonic = "DCB";
      line.operands = buf;
      off += 1;
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<DisasmLine> DisassembleImage(const FirmwareImage& image,
                                         Address addr, std::size_t count,
                                         const SymbolMap* syms) {
  if (count == 0) {
    image.ReadBytes(addr, 0);
    return {};
  }
  const MemoryRegion* region = image.RegionFor(addr, 1);
  if (region == nullptr) {
    throw Error(ErrorCode::kRange, Hex32(addr) + " is not mapped");
  }
  // Enough bytes for `count` 32-bit instructions, clipped to the region; the
  // tail beyond the code is only consulted for literal annotation.
  std::uint64_t avail = region->end() - addr;
  std::uint64_t want = std::min<std::uint64_t>(avail, count * 4 + 1024);
  Bytes bytes = image.ReadBytes(addr, static_cast<std::uint32_t>(want));
  return Disassemble(bytes, addr, syms, count);
}

std::string FormatListing(const std::vector<DisasmLine>& lines) {
  std::string out;
  for (const auto& l : lines) out += l.ToString() + "\n";
  return out;
}

}  // namespace fwhook::thumb

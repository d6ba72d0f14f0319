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

// Encoder, decoder and disassembler for the Thumb subset emitted by the hook
// assembler: PUSH/POP, MOVS (register and immediate), MOV (high registers),
// LDR (literal), BL, B.W, BX LR, ADDS/SUBS #imm8 and NOP.

#ifndef FWHOOK_THUMB_HPP_
#define FWHOOK_THUMB_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fwhook/firmware_image.hpp"

namespace fwhook {

class SymbolMap;

namespace thumb {

inline constexpr int kLr = 14;
inline constexpr int kPc = 15;

// BL/B.W reach: offset = target - (pc + 4) in [-16 MiB, 16 MiB - 2].
inline constexpr std::int64_t kBranchMin = -(std::int64_t{1} << 24);
inline constexpr std::int64_t kBranchMax = (std::int64_t{1} << 24) - 2;

enum class Op {
  kPush,
  kPop,
  kMovsReg,
  kMovsImm,
  kMov,
  kLdrLiteral,
  kBl,
  kBW,
  kBxLr,
  kAddsImm,
  kSubsImm,
  kNop,
};

const char* OpMnemonic(Op op);

struct Instr {
  Op op = Op::kNop;
  int rd = 0;
  int rm = 0;
  // PUSH: bits 0-7 plus kLr. POP: bits 0-7 plus kPc.
  std::uint16_t reg_list = 0;
  // MOVS/ADDS/SUBS: immediate. LDR: byte offset from Align(pc+4, 4).
  // BL/B.W: byte offset from pc+4.
  std::int32_t imm = 0;

  int width() const { return (op == Op::kBl || op == Op::kBW) ? 4 : 2; }

  bool operator==(const Instr&) const = default;
};

Instr Push(std::uint16_t reg_list);
Instr Pop(std::uint16_t reg_list);
Instr MovsReg(int rd, int rm);
Instr MovsImm(int rd, std::uint8_t imm);
Instr Mov(int rd, int rm);
Instr LdrLiteral(int rt, std::int32_t byte_offset);
Instr AddsImm(int rdn, std::uint8_t imm);
Instr SubsImm(int rdn, std::uint8_t imm);
Instr BxLr();
Instr Nop();

// Throws kEncode for operands outside the encoding's fields.
Bytes Encode(const Instr& instr);

// Decodes one instruction from the start of `bytes`; nullopt if the bytes are
// outside the supported subset or too short.
std::optional<Instr> Decode(std::span<const std::uint8_t> bytes);

std::array<std::uint8_t, 4> EncodeBl(Address pc, Address target);
std::array<std::uint8_t, 4> EncodeBw(Address pc, Address target);
// Throws kDecode if the bytes are not the matching branch form.
Address DecodeBl(std::span<const std::uint8_t> bytes, Address pc);
Address DecodeBw(std::span<const std::uint8_t> bytes, Address pc);

Address BranchTarget(const Instr& instr, Address pc);
// Absolute address of the word an LDR (literal) at `pc` loads.
Address LiteralAddress(const Instr& instr, Address pc);

std::string RegisterName(int reg);
std::string FormatRegList(std::uint16_t reg_list);

// Operand text, IDA style ("R4, R0", "{R4,LR}", "0x126F0").
std::string FormatOperands(const Instr& instr, Address pc);

struct DisasmLine {
  Address address = 0;
  Bytes raw;
  std::optional<Instr> instr;  // empty for data lines
  std::string mnemonic;
  std::string operands;
  std::string comment;

  std::string ToString() const;
};

// Linear sweep over `bytes` placed at `base`, at most `max_instructions` lines
// (0 = no limit). Undecodable halfwords become DCW lines.
std::vector<DisasmLine> Disassemble(std::span<const std::uint8_t> bytes,
                                    Address base, const SymbolMap* syms,
                                    std::size_t max_instructions = 0);

// Reads instructions straight from an image; stops at `count` lines or at
// the end of the containing region.
std::vector<DisasmLine> DisassembleImage(const FirmwareImage& image,
                                         Address addr, std::size_t count,
                                         const SymbolMap* syms);

std::string FormatListing(const std::vector<DisasmLine>& lines);

}  // namespace thumb
}  // namespace fwhook

#endif  // FWHOOK_THUMB_HPP_

#include <doctest.h>

#include <random>

#include "fwhook/error.hpp"
#include "fwhook/hook_program.hpp"
#include "fwhook/symbol_map.hpp"
#include "fwhook/thumb.hpp"
#include "test_util.hpp"

using fwhook::Address;
using fwhook::Bytes;
using fwhook::Error;
using fwhook::ErrorCode;
using fwhook::testing::FromHex;
namespace thumb = fwhook::thumb;

namespace {

// Frozen from tests/oracle/thumb_oracle.py (encoding tables + capstone).
struct BranchCase {
  bool link;
  Address pc;
  Address target;
  const char* hex;
};
constexpr BranchCase kOracleBranches[] = {
    {true, 0x180006, 0x126F0, "92f673fb"},
    {true, 0x18000C, 0x8C69C, "0cf746fb"},
    {true, 0x180000, 0x180004, "00f000f8"},
    {true, 0x180000, 0x1180002, "fff3ffd7"},
    {true, 0x1180000, 0x180004, "00f400d0"},
    {false, 0x4F7A4, 0x180000, "30f12cbc"},
    {false, 0x1AAD98, 0x180000, "d5f732b9"},
    {false, 0x1AAD98, 0x180024, "d5f744b9"},
};
constexpr const char* kOracleHelloWorldStub =
    "10b50400034892f673fb20000cf746fb10bd00001800180068656c6c6f20776f726c6400";

Bytes ToBytes(const std::array<std::uint8_t, 4>& a) { return Bytes(a.begin(), a.end()); }

}  // namespace

TEST_CASE("BL/B.W encodings match the reference oracle") {
  for (const auto& c : kOracleBranches) {
    CAPTURE(c.pc);
    CAPTURE(c.target);
    Bytes expected = FromHex(c.hex);
    if (c.link) {
      CHECK(ToBytes(thumb::EncodeBl(c.pc, c.target)) == expected);
      CHECK(thumb::DecodeBl(expected, c.pc) == c.target);
      CHECK_THROWS_AS(thumb::DecodeBw(expected, c.pc), Error);
    } else {
      CHECK(ToBytes(thumb::EncodeBw(c.pc, c.target)) == expected);
      CHECK(thumb::DecodeBw(expected, c.pc) == c.target);
      CHECK_THROWS_AS(thumb::DecodeBl(expected, c.pc), Error);
    }
  }
}

TEST_CASE("branch range and alignment errors") {
  // 0x180000 + 0x1000002 is offset 0xFFFFFE: the largest reachable target.
  CHECK_NOTHROW(thumb::EncodeBl(0x180000, 0x180000 + 0x1000002));
  // One halfword further is out of reach.
  CHECK_THROWS_AS(thumb::EncodeBl(0x180000, 0x180004 + 0x1000000), Error);
  CHECK_THROWS_AS(thumb::EncodeBw(0x1180000, 0x180002), Error);
  CHECK_THROWS_AS(thumb::EncodeBw(0x4F7A4, 0x180001), Error);
  CHECK_THROWS_AS(thumb::EncodeBl(0x4F7A5, 0x180000), Error);
  const Bytes zero(4, 0);
  CHECK_THROWS_AS(thumb::DecodeBl(zero, 0x180000), Error);
  CHECK_THROWS_AS(thumb::DecodeBw(zero, 0x180000), Error);
}

TEST_CASE("BL and B.W round trip over sampled valid pairs (property)") {
  std::mt19937_64 rng(2016);
  for (int i = 0; i < 20000; ++i) {
    Address pc = static_cast<Address>(rng()) & ~1u;
    std::int64_t off = static_cast<std::int64_t>(rng() % (1ull << 24)) * 2 - (1ll << 24);
    std::int64_t t = std::int64_t{pc} + 4 + off;
    if (t < 0 || t > 0xFFFFFFFEll) continue;
    Address target = static_cast<Address>(t);
    REQUIRE(thumb::DecodeBl(thumb::EncodeBl(pc, target), pc) == target);
    REQUIRE(thumb::DecodeBw(thumb::EncodeBw(pc, target), pc) == target);
  }
}

TEST_CASE("16-bit forms encode and decode") {
  struct Case {
    thumb::Instr in;
    std::uint16_t hw;
  };
  const Case cases[] = {
      {thumb::Push(0x4010), 0xB510},        // PUSH {R4,LR}
      {thumb::Pop(0x8010), 0xBD10},         // POP {R4,PC}
      {thumb::Push(0x40F0), 0xB5F0},        // PUSH {R4-R7,LR}
      {thumb::MovsReg(4, 0), 0x0004},       // MOVS R4, R0
      {thumb::MovsReg(0, 4), 0x0020},       // MOVS R0, R4
      {thumb::MovsImm(1, 0x2A), 0x212A},
      {thumb::Mov(8, 0), 0x4680},           // MOV R8, R0
      {thumb::Mov(0, 9), 0x4648},
      {thumb::LdrLiteral(0, 12), 0x4803},
      {thumb::AddsImm(2, 7), 0x3207},
      {thumb::SubsImm(3, 255), 0x3BFF},
      {thumb::BxLr(), 0x4770},
      {thumb::Nop(), 0xBF00},
  };
  for (const auto& c : cases) {
    CAPTURE(c.hw);
    Bytes enc = thumb::Encode(c.in);
    REQUIRE(enc.size() == 2);
    CHECK((enc[0] | enc[1] << 8) == c.hw);
    auto dec = thumb::Decode(enc);
    REQUIRE(dec.has_value());
    CHECK(*dec == c.in);
  }
  CHECK_THROWS_AS(thumb::Encode(thumb::MovsReg(8, 0)), Error);
  CHECK_THROWS_AS(thumb::Encode(thumb::MovsReg(2, 2)), Error);
  CHECK_THROWS_AS(thumb::Encode(thumb::LdrLiteral(0, 2)), Error);
  CHECK_THROWS_AS(thumb::Encode(thumb::LdrLiteral(0, 1024)), Error);
  CHECK_THROWS_AS(thumb::Encode(thumb::Push(0x8000)), Error);
  CHECK_THROWS_AS(thumb::Encode(thumb::Pop(0x4000)), Error);

  CHECK_FALSE(thumb::Decode(Bytes{0x00, 0x00}).has_value());
  CHECK_FALSE(thumb::Decode(Bytes{0x10}).has_value());
  CHECK_FALSE(thumb::Decode(Bytes{0x00, 0xF0}).has_value());  // truncated BL
}

TEST_CASE("hello-world stub reproduces the reference layout") {
  const auto syms = fwhook::BuiltinSymbolMap();
  auto stub = fwhook::AssembleStub(fwhook::HelloWorldProgram(), 0x180000, syms);
  CHECK(stub.Serialize() == FromHex(kOracleHelloWorldStub));
  CHECK(stub.code.size() == 0x12);
  REQUIRE(stub.literal_pool.size() == 1);
  CHECK(stub.literal_pool[0].offset == 0x14);
  CHECK(stub.literal_pool[0].value == 0x00180018);
  REQUIRE(stub.strings.size() == 1);
  CHECK(stub.strings[0].offset == 0x18);
  CHECK(stub.strings[0].text == std::string("hello world\0", 12));
  CHECK(stub.total_size == 0x24);
  CHECK(stub.call_targets == std::vector<Address>{0x126F0, 0x8C69C});

  auto lines = fwhook::DisassembleStub(stub, &syms);
  std::vector<std::string> text;
  for (const auto& l : lines) text.push_back(l.ToString());
  CHECK(text == std::vector<std::string>{
                    "00180000  PUSH    {R4,LR}",
                    "00180002  MOVS    R4, R0",
                    "00180004  LDR     R0, =0x00180018 ; \"hello world\"",
                    "00180006  BL      0x126F0 ; printf",
                    "0018000A  MOVS    R0, R4",
                    "0018000C  BL      0x8C69C ; dma_rx",
                    "00180010  POP     {R4,PC}",
                    "00180012  ALIGN   4",
                    "00180014  DCD     0x00180018 ; \"hello world\"",
                    "00180018  DCB     \"hello world\",0",
                });
}

TEST_CASE("degenerate and ill-formed programs") {
  const auto syms = fwhook::BuiltinSymbolMap();
  using namespace fwhook;
  CHECK_THROWS_AS(AssembleStub(HookProgram{}, 0x180000, syms), Error);

  auto ret_only = AssembleStub(HookProgram{{ReturnLastResult{}}}, 0x180000, syms);
  CHECK(ret_only.Serialize() == Bytes{0x70, 0x47});
  CHECK(ret_only.total_size == 2);

  CHECK_THROWS_AS(AssembleStub(HookProgram{{SaveScratch{},
                                            Call{std::string("printf"),
                                                 {IntegerLiteral{1}, IntegerLiteral{2},
                                                  IntegerLiteral{3}, IntegerLiteral{4},
                                                  IntegerLiteral{5}}},
                                            ReturnLastResult{}}},
                               0x180000, syms),
                  Error);
  CHECK_THROWS_WITH_AS(
      AssembleStub(HookProgram{{SaveScratch{}, Call{std::string("nope"), {}},
                                ReturnLastResult{}}},
                   0x180000, syms),
      doctest::Contains("nope"), Error);
  // Call without a frame, missing terminator, misplaced save, frame + tail.
  CHECK_THROWS_AS(AssembleStub(HookProgram{{Call{std::string("printf"), {}},
                                            ReturnLastResult{}}},
                               0x180000, syms),
                  Error);
  CHECK_THROWS_AS(AssembleStub(HookProgram{{SaveScratch{}}}, 0x180000, syms), Error);
  CHECK_THROWS_AS(AssembleStub(HookProgram{{ReturnLastResult{}, SaveScratch{}}},
                               0x180000, syms),
                  Error);
  CHECK_THROWS_AS(AssembleStub(HookProgram{{SaveScratch{},
                                            TailCall{std::string("dma_rx")}}},
                               0x180000, syms),
                  Error);
  CHECK_THROWS_AS(AssembleStub(HookProgram{{SaveScratch{},
                                            Call{std::string("printf"),
                                                 {ForwardedParam{4}}},
                                            ReturnLastResult{}}},
                               0x180000, syms),
                  Error);
  CHECK_THROWS_AS(AssembleStub(HookProgram{{ReturnLastResult{}}}, 0x180001, syms),
                  Error);
  // BL from a stub above 16 MiB cannot reach printf.
  CHECK_THROWS_AS(AssembleStub(HelloWorldProgram(), 0x2000000, syms), Error);
}

TEST_CASE("integer arguments and tail calls") {
  using namespace fwhook;
  const auto syms = BuiltinSymbolMap();
  auto stub = AssembleStub(
      HookProgram{{SaveScratch{},
                   Call{std::string("printf"),
                        {IntegerLiteral{7}, IntegerLiteral{300},
                         IntegerLiteral{0xDEADBEEF}, ForwardedParam{2}}},
                   ReturnLastResult{}}},
      0x180100, syms);
  std::vector<thumb::Op> ops;
  for (const auto& in : stub.instructions) ops.push_back(in.op);
  CHECK(ops == std::vector<thumb::Op>{thumb::Op::kPush, thumb::Op::kMovsReg,
                                      thumb::Op::kMovsImm, thumb::Op::kMovsImm,
                                      thumb::Op::kAddsImm, thumb::Op::kLdrLiteral,
                                      thumb::Op::kMovsReg, thumb::Op::kBl,
                                      thumb::Op::kPop});
  REQUIRE(stub.literal_pool.size() == 1);
  CHECK(stub.literal_pool[0].value == 0xDEADBEEF);
  CHECK(stub.literal_pool[0].string_index == -1);

  auto tail = AssembleStub(HookProgram{{TailCall{std::string("dma_rx")}}}, 0x180000, syms);
  REQUIRE(tail.instructions.size() == 1);
  CHECK(tail.instructions[0].op == thumb::Op::kBW);
  CHECK(thumb::DecodeBw(tail.code, 0x180000) == 0x8C69C);

  auto fwd = AssembleStub(TrapForwardProgram(0x180040), 0x180000, syms);
  CHECK(fwd.instructions.front() == thumb::Push(0x40F0));
  CHECK(fwd.instructions.back() == thumb::Pop(0x80F0));
  CHECK(fwd.call_targets == std::vector<Address>{0x180040});
}

TEST_CASE("stub invariants over generated programs (property)") {
  using namespace fwhook;
  const auto syms = BuiltinSymbolMap();
  const char* callees[] = {"printf", "dma_rx", "dma_rxfill", "wlc_bmac_mctrl",
                           "dngl_sendpkt"};
  std::mt19937 rng(99);
  for (int iter = 0; iter < 300; ++iter) {
    HookProgram prog;
    prog.ops.push_back(SaveScratch{});
    int calls = 1 + static_cast<int>(rng() % 4);
    for (int c = 0; c < calls; ++c) {
      Call call{std::string(callees[rng() % 5]), {}};
      int nargs = static_cast<int>(rng() % 5);
      for (int a = 0; a < nargs; ++a) {
        switch (rng() % 3) {
          case 0: call.args.push_back(ForwardedParam{static_cast<int>(rng() % 4)}); break;
          case 1: call.args.push_back(StringLiteral{"s" + std::to_string(rng() % 5)}); break;
          default: call.args.push_back(IntegerLiteral{static_cast<std::uint32_t>(rng() % 2000)});
        }
      }
      prog.ops.push_back(call);
    }
    prog.ops.push_back(ReturnLastResult{});

    const Address base = 0x180000 + 4 * (rng() % 0x1000);
    auto stub = AssembleStub(prog, base, syms);
    auto moved = AssembleStub(prog, base + 0x100, syms);
    Bytes bytes = stub.Serialize();
    REQUIRE(bytes.size() == stub.total_size);

    // One BL per call op, in order, decoding to the resolved symbol.
    std::vector<Address> bl_targets;
    Address pc = base;
    for (const auto& in : stub.instructions) {
      if (in.op == thumb::Op::kBl) bl_targets.push_back(thumb::BranchTarget(in, pc));
      pc += static_cast<Address>(in.width());
    }
    REQUIRE(bl_targets.size() == static_cast<std::size_t>(calls));
    for (int c = 0; c < calls; ++c) {
      const auto& call = std::get<Call>(prog.ops[c + 1]);
      REQUIRE(bl_targets[c] == syms.Require(std::get<std::string>(call.target)));
    }
    // Pool words name their strings by absolute address.
    for (const auto& w : stub.literal_pool) {
      REQUIRE((base + w.offset) % 4 == 0);
      if (w.string_index >= 0) {
        REQUIRE(w.value == base + stub.strings[w.string_index].offset);
      }
    }
    // Linear disassembly of the code part never falls back to data.
    auto lines = thumb::Disassemble(stub.code, base, &syms);
    REQUIRE(lines.size() == stub.instructions.size());
    for (const auto& l : lines) REQUIRE(l.instr.has_value());

    // Position dependence only touches BL offsets and pool words.
    REQUIRE(moved.instructions.size() == stub.instructions.size());
    REQUIRE(moved.code.size() == stub.code.size());
    for (std::size_t i = 0; i < stub.instructions.size(); ++i) {
      const auto& a = stub.instructions[i];
      const auto& b = moved.instructions[i];
      REQUIRE(a.op == b.op);
      if (a.op != thumb::Op::kBl) REQUIRE(a == b);
    }
    for (std::size_t i = 0; i < stub.literal_pool.size(); ++i) {
      if (stub.literal_pool[i].string_index >= 0) {
        REQUIRE(moved.literal_pool[i].value == stub.literal_pool[i].value + 0x100);
      } else {
        REQUIRE(moved.literal_pool[i].value == stub.literal_pool[i].value);
      }
    }
  }
}

TEST_CASE("disassembler edge cases") {
  const auto syms = fwhook::BuiltinSymbolMap();
  auto zero = thumb::Disassemble(Bytes{0, 0}, 0x180000, &syms);
  REQUIRE(zero.size() == 1);
  CHECK_FALSE(zero[0].instr.has_value());
  CHECK(zero[0].ToString() == "00180000  DCW     0x0000");

  auto bl = thumb::EncodeBl(0x180100, 0x8C69C);
  auto lines = thumb::Disassemble(bl, 0x180100, &syms);
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].comment == "dma_rx");
  CHECK(thumb::Disassemble(bl, 0x180100, nullptr)[0].comment.empty());

  auto odd = thumb::Disassemble(Bytes{0x70, 0x47, 0xAB}, 0x180000, &syms);
  REQUIRE(odd.size() == 2);
  CHECK(odd[1].ToString() == "00180002  DCB     0xAB");

  auto image = fwhook::FirmwareImage::DefaultLayout();
  CHECK(thumb::DisassembleImage(image, 0x180000, 0, &syms).empty());
  CHECK_THROWS_AS(thumb::DisassembleImage(image, 0xA0000, 0, &syms), Error);
  CHECK_THROWS_AS(thumb::DisassembleImage(image, 0xA0000, 4, &syms), Error);
  CHECK(thumb::DisassembleImage(image, 0x23FFFC, 10, &syms).size() == 2);
}

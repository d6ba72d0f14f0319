#include <doctest.h>

#include <random>
#include <set>

#include "fwhook/error.hpp"
#include "fwhook/symbol_map.hpp"
#include "test_util.hpp"

using fwhook::Error;
using fwhook::Symbol;
using fwhook::SymbolKind;
using fwhook::SymbolMap;

TEST_CASE("builtin map holds every reception-path constant") {
  const SymbolMap map = fwhook::BuiltinSymbolMap();
  const std::pair<const char*, fwhook::Address> expected[] = {
      {"printf", 0x126F0},
      {"dma_rx", 0x8C69C},
      {"wlc_bmac_recv", 0x1aad98},
      {"wlc_bmac_recv_wrapper", 0x4f7a4},
      {"wlc_recv", 0x19afe8},
      {"dngl_sendpkt", 0x182750},
      {"dma_txfast", 0x1844b2},
      {"wlc_bmac_mctrl", 0x4f080},
      {"wlc_coreinit", 0x1ab66c},
      {"coreinit_mctrl_mask_word", 0x1ab82c},
      {"coreinit_mctrl_value_word", 0x1ab828},
      {"fiq_ram_handler", 0x180fee},
      {"common_exception_handler", 0x181032},
      {"callback_ref", 0x181100},
      {"callback_fn", 0x181e48},
      {"fiq_dispatch", 0x181a88},
      {"handler_list_ref", 0x180e5c},
      {"wlc_dpc_0", 0x27550},
      {"wlc_dpc_1", 0x2733c},
      {"wlc_dpc_2", 0x61eb4},
  };
  for (const auto& [name, addr] : expected) {
    CAPTURE(name);
    auto sym = map.Lookup(name);
    REQUIRE(sym.has_value());
    CHECK(sym->address == addr);
  }

  // Intermediate wlc_recv -> dngl_sendpkt -> dma_txfast path constants.
  std::set<fwhook::Address> chain;
  for (const auto& s : map.entries()) {
    if (s.kind == SymbolKind::kChainNode) chain.insert(s.address);
  }
  for (fwhook::Address a : {0x19955fu, 0x198cddu, 0x1981f5u, 0x1893b5u, 0x183771u,
                            0x182C84u, 0x18256cu, 0x182450u}) {
    CAPTURE(a);
    CHECK(chain.count(a) == 1);
  }

  CHECK(map.Lookup("coreinit_mctrl_mask_word")->kind == SymbolKind::kDataWord);
  for (const auto& s : map.entries()) {
    if (s.kind == SymbolKind::kFunction) {
      CAPTURE(s.name);
      CHECK(s.thumb);
      CHECK((s.address & 1) == 0);
    }
  }
}

TEST_CASE("reverse lookup only finds functions") {
  const SymbolMap map = fwhook::BuiltinSymbolMap();
  CHECK(map.ReverseLookup(0x8C69C)->name == "dma_rx");
  CHECK(map.ReverseLookup(0x1aad98)->name == "wlc_bmac_recv");
  CHECK_FALSE(map.ReverseLookup(0x1).has_value());
  CHECK_FALSE(map.ReverseLookup(0x1ab82c).has_value());
  CHECK(map.Require("printf") == 0x126F0);
  CHECK_THROWS_AS(map.Require("nonexistent"), Error);
}

TEST_CASE("map invariants are enforced on insert") {
  SymbolMap map;
  map.Add({"a", 0x100, SymbolKind::kFunction, true});
  CHECK_THROWS_WITH_AS(map.Add({"a", 0x200, SymbolKind::kFunction, true}),
                       doctest::Contains("a"), Error);
  CHECK_THROWS_AS(map.Add({"b", 0x100, SymbolKind::kFunction, true}), Error);
  CHECK_THROWS_AS(map.Add({"c", 0x101, SymbolKind::kFunction, true}), Error);
  // Data words may share an address with a function and need no alignment.
  map.Add({"d", 0x101, SymbolKind::kDataWord, false});
  CHECK(map.size() == 2);
}

TEST_CASE("save/load round trip") {
  fwhook::testing::TempDir dir;
  const SymbolMap builtin = fwhook::BuiltinSymbolMap();
  fwhook::SaveSymbolMap(builtin, dir / "syms.json");
  CHECK(fwhook::LoadSymbolMap(dir / "syms.json") == builtin);

  std::ofstream(dir / "empty.json").close();
  CHECK(fwhook::LoadSymbolMap(dir / "empty.json").empty());
  CHECK_THROWS_AS(fwhook::LoadSymbolMap(dir / "absent.json"), Error);
}

TEST_CASE("load rejects duplicates and malformed entries") {
  CHECK_THROWS_WITH_AS(
      fwhook::ParseSymbolMap(R"([{"name":"printf","address":"0x126F0"},
                                {"name":"printf","address":"0x8C69C"}])"),
      doctest::Contains("printf"), Error);
  CHECK_THROWS_AS(fwhook::ParseSymbolMap("{"), Error);
  CHECK_THROWS_AS(fwhook::ParseSymbolMap(R"({"name":"x"})"), Error);
  CHECK_THROWS_AS(fwhook::ParseSymbolMap(R"([{"name":"x","address":"zz"}])"), Error);
  CHECK_THROWS_AS(fwhook::ParseSymbolMap(R"([{"name":"x","address":"0x10","kind":"blob"}])"),
                  Error);
  auto m = fwhook::ParseSymbolMap(R"([{"name":"x","address":"0x10"}])");
  CHECK(m.Lookup("x")->kind == SymbolKind::kFunction);
  CHECK(m.Lookup("x")->thumb);
}

TEST_CASE("save/load is lossless for generated maps (property)") {
  std::mt19937 rng(11);
  const SymbolKind kinds[] = {SymbolKind::kFunction, SymbolKind::kDataWord,
                              SymbolKind::kChainNode};
  for (int iter = 0; iter < 200; ++iter) {
    SymbolMap map;
    int n = static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) {
      Symbol s;
      s.name = "sym_" + std::to_string(iter) + "_" + std::to_string(i) + "_" +
               std::to_string(rng() % 1000);
      s.kind = kinds[rng() % 3];
      s.address = static_cast<fwhook::Address>(rng());
      if (s.kind == SymbolKind::kFunction) s.address &= ~1u;
      s.thumb = (rng() & 1) != 0;
      try {
        map.Add(s);
      } catch (const Error&) {
        // address collision between generated functions; skip
      }
    }
    REQUIRE(fwhook::ParseSymbolMap(fwhook::SerializeSymbolMap(map)) == map);
  }
}

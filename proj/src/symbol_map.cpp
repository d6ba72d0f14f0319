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

#include "fwhook/symbol_map.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fwhook/error.hpp"

namespace fwhook {

const char* SymbolKindName(SymbolKind kind) {
  switch (kind) {
    case SymbolKind::kFunction: return "function";
    case SymbolKind::kDataWord: return "data-word";
    case SymbolKind::kChainNode: return "handler-chain-node";
  }
  return "function";
}

std::optional<SymbolKind> ParseSymbolKind(std::string_view text) {
  if (text == "function") return SymbolKind::kFunction;
  if (text == "data-word") return SymbolKind::kDataWord;
  if (text == "handler-chain-node") return SymbolKind::kChainNode;
  return std::nullopt;
}

void SymbolMap::Add(Symbol symbol) {
  if (by_name_.count(symbol.name) != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "duplicate symbol " + symbol.name);
  }
  if (symbol.kind == SymbolKind::kFunction) {
    if (symbol.address & 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "function " + symbol.name + " at " + Hex32(symbol.address) +
                      " is not halfword-aligned");
    }
    auto [it, inserted] = functions_.emplace(symbol.address, symbol.name);
    if (!inserted) {
      throw Error(ErrorCode::kInvalidArgument,
                  "functions " + it->second + " and " + symbol.name +
                      " share address " + Hex32(symbol.address));
    }
  }
  std::string key = symbol.name;
  by_name_.emplace(std::move(key), std::move(symbol));
}

std::optional<Symbol> SymbolMap::Lookup(std::string_view name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

Address SymbolMap::Require(std::string_view name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                "unresolved symbol " + std::string(name));
  }
  return it->second.address;
}

std::optional<Symbol> SymbolMap::ReverseLookup(Address addr) const {
  auto it = functions_.find(addr);
  if (it == functions_.end()) return std::nullopt;
  return by_name_.find(it->second)->second;
}

std::vector<Symbol> SymbolMap::entries() const {
  std::vector<Symbol> out;
  out.reserve(by_name_.size());
  for (const auto& [name, sym] : by_name_) out.push_back(sym);
  return out;
}

SymbolMap BuiltinSymbolMap() {
  constexpr auto F = SymbolKind::kFunction;
  constexpr auto D = SymbolKind::kDataWord;
  constexpr auto N = SymbolKind::kChainNode;
  SymbolMap map;
  const Symbol entries[] = {
      {"printf", 0x126F0, F, true},
      {"dma_rx", 0x8C69C, F, true},
      {"wlc_bmac_recv", 0x1AAD98, F, true},
      {"wlc_bmac_recv_wrapper", 0x4F7A4, F, true},
      {"wlc_recv", 0x19AFE8, F, true},
      {"dngl_sendpkt", 0x182750, F, true},
      {"dma_txfast", 0x1844B2, F, true},
      {"wlc_bmac_mctrl", 0x4F080, F, true},
      {"wlc_coreinit", 0x1AB66C, F, true},
      {"coreinit_mctrl_mask_word", 0x1AB82C, D, false},
      {"coreinit_mctrl_value_word", 0x1AB828, D, false},
      // FIQ path from the exception vector down to the wlc_dpc list.
      {"fiq_ram_handler", 0x180FEE, N, true},
      {"common_exception_handler", 0x181032, N, true},
      {"callback_ref", 0x181100, N, false},
      {"callback_fn", 0x181E48, N, true},
      {"fiq_dispatch", 0x181A88, N, true},
      {"handler_list_ref", 0x180E5C, N, false},
      {"wlc_dpc_0", 0x27550, N, true},
      {"wlc_dpc_1", 0x2733C, N, true},
      {"wlc_dpc_2", 0x61EB4, N, true},
      // wlc_recv -> dngl_sendpkt
      {"sendpkt_path_0", 0x19955F, N, true},
      {"sendpkt_path_1", 0x198CDD, N, true},
      {"sendpkt_path_2", 0x1981F5, N, true},
      {"sendpkt_path_3", 0x1893B5, N, true},
      {"sendpkt_path_4", 0x183771, N, true},
      {"sendpkt_path_5", 0x182C84, N, true},
      // dngl_sendpkt -> dma_txfast
      {"txfast_path_0", 0x18256C, N, true},
      {"txfast_path_1", 0x182450, N, true},
      // Not located by the reverse engineering; fixed addresses in the
      // modeled image.
      {"dma_rxfill", 0x8C9A0, F, true},
      {"wlc_bmac_recv_rx_veneer", 0x1AADC0, F, true},
      {"dpc_rx_count", 0x23FFF0, D, false},
  };
  for (const auto& e : entries) map.Add(e);
  return map;
}

const std::vector<std::string>& ReceiveDispatchChain() {
  static const std::vector<std::string> chain = {
      "fiq_ram_handler", "common_exception_handler", "callback_ref",
      "callback_fn",     "fiq_dispatch",             "handler_list_ref",
      "wlc_dpc_0",       "wlc_dpc_1",                "wlc_dpc_2",
      "wlc_bmac_recv_wrapper", "wlc_bmac_recv"};
  return chain;
}

namespace {

Address ParseAddress(const nlohmann::json& j, const std::string& name) {
  if (j.is_number_unsigned()) {
    auto v = j.get<std::uint64_t>();
    if (v <= 0xFFFFFFFFull) return static_cast<Address>(v);
  } else if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    std::size_t used = 0;
    try {
      auto v = std::stoull(s, &used, 0);
      if (used == s.size() && v <= 0xFFFFFFFFull) return static_cast<Address>(v);
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorCode::kParse, "bad address for symbol " + name);
}

}  // namespace

SymbolMap ParseSymbolMap(std::string_view json_text) {
  SymbolMap map;
  if (json_text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    return map;
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("symbol map: ") + e.what());
  }
  if (!doc.is_array()) {
    throw Error(ErrorCode::kParse, "symbol map must be a JSON array");
  }
  for (const auto& entry : doc) {
    if (!entry.is_object() || !entry.contains("name") ||
        !entry["name"].is_string() || !entry.contains("address")) {
      throw Error(ErrorCode::kParse, "symbol entry needs name and address");
    }
    Symbol sym;
    sym.name = entry["name"].get<std::string>();
    sym.address = ParseAddress(entry["address"], sym.name);
    if (entry.contains("kind")) {
      auto kind = entry["kind"].is_string()
                      ? ParseSymbolKind(entry["kind"].get<std::string>())
                      : std::nullopt;
      if (!kind) throw Error(ErrorCode::kParse, "bad kind for " + sym.name);
      sym.kind = *kind;
    }
    if (entry.contains("thumb")) {
      if (!entry["thumb"].is_boolean()) {
        throw Error(ErrorCode::kParse, "bad thumb flag for " + sym.name);
      }
      sym.thumb = entry["thumb"].get<bool>();
    } else {
      sym.thumb = sym.kind != SymbolKind::kDataWord;
    }
    try {
      map.Add(std::move(sym));
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, e.what());
    }
  }
  return map;
}

std::string SerializeSymbolMap(const SymbolMap& map) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& sym : map.entries()) {
    doc.push_back({{"name", sym.name},
                   {"address", Hex32(sym.address)},
                   {"kind", SymbolKindName(sym.kind)},
                   {"thumb", sym.thumb}});
  }
  return doc.dump(2) + "\n";
}

SymbolMap LoadSymbolMap(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseSymbolMap(ss.str());
}

void SaveSymbolMap(const SymbolMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << SerializeSymbolMap(map);
}

}  // namespace fwhook

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

#ifndef FWHOOK_SYMBOL_MAP_HPP_
#define FWHOOK_SYMBOL_MAP_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fwhook/firmware_image.hpp"

namespace fwhook {

enum class SymbolKind { kFunction, kDataWord, kChainNode };

const char* SymbolKindName(SymbolKind kind);
std::optional<SymbolKind> ParseSymbolKind(std::string_view text);

struct Symbol {
  std::string name;
  Address address = 0;
  SymbolKind kind = SymbolKind::kFunction;
  bool thumb = true;

  bool operator==(const Symbol&) const = default;
};

class SymbolMap {
 public:
  // Throws kInvalidArgument on a duplicate name, a misaligned function, or a
  // second function at an address that already has one.
  void Add(Symbol symbol);

  std::optional<Symbol> Lookup(std::string_view name) const;
  // Address of `name`; throws kInvalidArgument naming the missing symbol.
  Address Require(std::string_view name) const;
  // The function symbol at exactly `addr`, if any. Data words and chain nodes
  // are never returned.
  std::optional<Symbol> ReverseLookup(Address addr) const;

  std::vector<Symbol> entries() const;
  std::size_t size() const { return by_name_.size(); }
  bool empty() const { return by_name_.empty(); }

  bool operator==(const SymbolMap&) const = default;

 private:
  std::map<std::string, Symbol, std::less<>> by_name_;
  std::map<Address, std::string> functions_;
};

// Every firmware address the reception path and the patch sets rely on.
SymbolMap BuiltinSymbolMap();

// JSON array of {name, address: "0x...", kind, thumb}.
SymbolMap ParseSymbolMap(std::string_view json_text);
std::string SerializeSymbolMap(const SymbolMap& map);
SymbolMap LoadSymbolMap(const std::filesystem::path& path);
void SaveSymbolMap(const SymbolMap& map, const std::filesystem::path& path);

// Names of the handler-chain nodes walked on a receive interrupt, in order.
const std::vector<std::string>& ReceiveDispatchChain();

}  // namespace fwhook

#endif  // FWHOOK_SYMBOL_MAP_HPP_

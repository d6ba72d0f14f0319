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

#include "fwhook/patcher.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <map>

#include <json.hpp>

#include "fwhook/error.hpp"
#include "fwhook/symbol_map.hpp"
#include "fwhook/thumb.hpp"

namespace fwhook {

void MctlBits::Validate() const {
  if (combined() == 0) return;
  const std::uint32_t bits[] = {promisc, keepcontrol, bcns_promisc, keepbadfcs};
  for (std::uint32_t b : bits) {
    if (!std::has_single_bit(b)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "maccontrol flag " + Hex32(b) + " is not a single bit");
    }
  }
  if (std::popcount(combined()) != 4) {
    throw Error(ErrorCode::kInvalidArgument, "maccontrol flags must be distinct");
  }
}

const char* ActionKindName(ActionKind kind) {
  switch (kind) {
    case ActionKind::kInstallStub: return "install_stub";
    case ActionKind::kRedirectBranch: return "redirect_branch";
    case ActionKind::kReplaceFunction: return "replace_function";
    case ActionKind::kOrWord: return "or_word";
  }
  return "?";
}

const char* CheckStatusName(CheckStatus status) {
  switch (status) {
    case CheckStatus::kPass: return "pass";
    case CheckStatus::kFail: return "fail";
    case CheckStatus::kDegenerate: return "degenerate";
  }
  return "?";
}

namespace {

[[noreturn]] void PlanError(const std::string& what) {
  throw Error(ErrorCode::kPlan, "plan: " + what);
}

std::uint32_t AlignUp4(std::uint64_t v) {
  return static_cast<std::uint32_t>((v + 3) & ~std::uint64_t{3});
}

// BX LR; NOP. Harmless if the slot is ever executed without a trap.
const Bytes kTrapSlotBytes = {0x70, 0x47, 0x00, 0xBF};

Bytes EncodeBranch(BranchKind kind, Address pc, Address target) {
  auto b = kind == BranchKind::kBl ? thumb::EncodeBl(pc, target)
                                   : thumb::EncodeBw(pc, target);
  return Bytes(b.begin(), b.end());
}

const char* BranchName(BranchKind kind) {
  return kind == BranchKind::kBl ? "BL" : "B.W";
}

std::optional<Address> DecodeBranch(BranchKind kind, const Bytes& bytes,
                                    Address pc) {
  auto in = thumb::Decode(bytes);
  thumb::Op want = kind == BranchKind::kBl ? thumb::Op::kBl : thumb::Op::kBW;
  if (!in || in->op != want) return std::nullopt;
  return thumb::BranchTarget(*in, pc);
}

}  // namespace

PlannedPatch Plan(const std::vector<PatchAction>& actions,
                  const FirmwareImage& image, const SymbolMap& syms,
                  const PatchConfig& config, std::string patchset) {
  if (config.placement_base % 4 != 0 ||
      config.placement_limit <= config.placement_base ||
      !image.IsWritable(config.placement_base,
                        config.placement_limit - config.placement_base)) {
    PlanError("placement window [" + Hex32(config.placement_base) + ", " +
              Hex32(config.placement_limit) +
              ") is not a 4-aligned writable range");
  }

  PlannedPatch plan;
  plan.patchset = std::move(patchset);
  plan.placement_base = config.placement_base;

  auto symbol_address = [&](const std::string& name) {
    auto sym = syms.Lookup(name);
    if (!sym) PlanError("unresolved symbol " + name);
    return sym->address;
  };

  // Pass 1: lay out every stub so later actions can reference them.
  std::map<std::string, Address> stub_bases;
  Address cursor = config.placement_base;
  for (std::size_t id = 0; id < actions.size(); ++id) {
    const auto* install = std::get_if<InstallStub>(&actions[id]);
    if (install == nullptr) continue;
    if (stub_bases.count(install->label)) {
      PlanError("duplicate stub label " + install->label);
    }
    const bool bump = !install->at.has_value();
    const Address base = bump ? cursor : *install->at;
    if (base & 1) PlanError("stub " + install->label + " base is misaligned");

    ManifestEntry e;
    e.action_id = static_cast<int>(id);
    e.kind = ActionKind::kInstallStub;
    e.label = install->label;
    e.address = base;
    try {
      if (const auto* prog = std::get_if<HookProgram>(&install->body)) {
        EncodedStub stub = AssembleStub(*prog, base, syms);
        e.new_bytes = stub.Serialize();
        e.code_size = static_cast<std::uint32_t>(stub.code.size());
        e.call_targets = stub.call_targets;
      } else {
        const auto& trap = std::get<NativeTrap>(install->body);
        // Forwarder size does not depend on the slot address.
        auto probe = AssembleStub(TrapForwardProgram(base), base, syms);
        const Address slot = AlignUp4(std::uint64_t{base} + probe.total_size);
        EncodedStub stub = AssembleStub(TrapForwardProgram(slot), base, syms);
        e.new_bytes = stub.Serialize();
        e.new_bytes.resize(slot - base, 0);
        e.new_bytes.insert(e.new_bytes.end(), kTrapSlotBytes.begin(),
                           kTrapSlotBytes.end());
        e.code_size = static_cast<std::uint32_t>(stub.code.size());
        e.call_targets = stub.call_targets;
        plan.traps.push_back({slot, trap.tag});
      }
    } catch (const Error& err) {
      PlanError("stub " + install->label + ": " + err.what());
    }
    if (bump) {
      if (e.end() > config.placement_limit) {
        PlanError("placement window exhausted by stub " + install->label +
                  " (needs " + Hex(e.new_bytes.size()) + " bytes at " +
                  Hex32(base) + ")");
      }
      cursor = AlignUp4(e.end());
    }
    stub_bases.emplace(install->label, base);
    plan.entries.push_back(std::move(e));
  }

  auto resolve = [&](const TargetRef& ref) -> Address {
    if (const auto* a = std::get_if<AddressRef>(&ref)) return a->address;
    if (const auto* s = std::get_if<SymbolRef>(&ref)) return symbol_address(s->name);
    const auto& label = std::get<StubRef>(ref).label;
    auto it = stub_bases.find(label);
    if (it == stub_bases.end()) PlanError("no stub labelled " + label);
    return it->second;
  };

  // Pass 2: branches and data words.
  for (std::size_t id = 0; id < actions.size(); ++id) {
    const PatchAction& action = actions[id];
    if (std::holds_alternative<InstallStub>(action)) continue;
    ManifestEntry e;
    e.action_id = static_cast<int>(id);

    if (const auto* redirect = std::get_if<RedirectBranch>(&action)) {
      e.kind = ActionKind::kRedirectBranch;
      e.address = redirect->site;
      e.branch_kind = redirect->kind;
      e.branch_target = resolve(redirect->target);
      e.label = std::string(BranchName(redirect->kind)) + " at " + Hex32(redirect->site);
      if (!image.IsMapped(redirect->site, 4)) {
        PlanError("redirect site " + Hex32(redirect->site) + " is not mapped");
      }
      if (!DecodeBranch(redirect->kind, image.ReadBytes(redirect->site, 4),
                        redirect->site)) {
        PlanError("redirect site " + Hex32(redirect->site) + " does not hold a " +
                  BranchName(redirect->kind));
      }
    } else if (const auto* replace = std::get_if<ReplaceFunction>(&action)) {
      auto sym = syms.Lookup(replace->symbol);
      if (!sym) PlanError("unresolved symbol " + replace->symbol);
      if (sym->kind != SymbolKind::kFunction) {
        PlanError(replace->symbol + " is not a function");
      }
      e.kind = ActionKind::kReplaceFunction;
      e.label = replace->symbol;
      e.address = sym->address;
      e.branch_kind = BranchKind::kBW;
      e.branch_target = resolve(replace->target);
    } else {
      const auto& orw = std::get<OrWord>(action);
      e.kind = ActionKind::kOrWord;
      if (const auto* name = std::get_if<std::string>(&orw.word)) {
        e.address = symbol_address(*name);
        e.label = *name;
      } else {
        e.address = std::get<Address>(orw.word);
        e.label = Hex32(e.address);
      }
      e.bits = orw.bits;
      if (e.address % 4 != 0) PlanError("or_word target " + Hex32(e.address) + " is not 4-aligned");
    }

    if (!image.IsWritable(e.address, 4)) {
      PlanError(std::string(ActionKindName(e.kind)) + " target " +
                Hex32(e.address) + " is not writable");
    }
    if (e.kind == ActionKind::kOrWord) {
      std::uint32_t w = image.ReadWord(e.address) | e.bits;
      e.new_bytes = {static_cast<std::uint8_t>(w), static_cast<std::uint8_t>(w >> 8),
                     static_cast<std::uint8_t>(w >> 16),
                     static_cast<std::uint8_t>(w >> 24)};
    } else {
      try {
        e.new_bytes = EncodeBranch(e.branch_kind, e.address, e.branch_target);
      } catch (const Error& err) {
        PlanError(std::string(BranchName(e.branch_kind)) + " at " +
                  Hex32(e.address) + " to " + Hex32(e.branch_target) + ": " +
                  err.what());
      }
    }
    plan.entries.push_back(std::move(e));
  }

  std::sort(plan.entries.begin(), plan.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) {
              return a.action_id < b.action_id;
            });

  // Ranges must be disjoint and writable; capture what is there now.
  std::vector<const ManifestEntry*> by_addr;
  for (auto& e : plan.entries) {
    if (!image.IsWritable(e.address, e.new_bytes.size())) {
      PlanError(e.label + " range at " + Hex32(e.address) + " (+" +
                Hex(e.new_bytes.size()) + ") is not inside a writable region");
    }
    e.old_bytes = image.ReadBytes(e.address, static_cast<std::uint32_t>(e.new_bytes.size()));
    by_addr.push_back(&e);
  }
  std::sort(by_addr.begin(), by_addr.end(),
            [](const ManifestEntry* a, const ManifestEntry* b) {
              return a->address < b->address;
            });
  for (std::size_t i = 1; i < by_addr.size(); ++i) {
    if (by_addr[i]->address < by_addr[i - 1]->end()) {
      PlanError(by_addr[i - 1]->label + " and " + by_addr[i]->label +
                " overlap at " + Hex32(by_addr[i]->address));
    }
  }
  return plan;
}

PatchManifest Apply(const PlannedPatch& plan, FirmwareImage& image) {
  for (const auto& e : plan.entries) {
    if (!image.IsMapped(e.address, e.old_bytes.size()) ||
        image.ReadBytes(e.address, static_cast<std::uint32_t>(e.old_bytes.size())) !=
            e.old_bytes) {
      throw Error(ErrorCode::kPlan,
                  "apply: image at " + Hex32(e.address) + " (" + e.label +
                      ") no longer matches the plan");
    }
  }
  for (const auto& e : plan.entries) image.WriteBytes(e.address, e.new_bytes);
  return plan;
}

void Rollback(const PatchManifest& manifest, FirmwareImage& image) {
  for (const auto& e : manifest.entries) {
    if (!image.IsMapped(e.address, e.new_bytes.size()) ||
        image.ReadBytes(e.address, static_cast<std::uint32_t>(e.new_bytes.size())) !=
            e.new_bytes) {
      throw Error(ErrorCode::kPlan,
                  "rollback: image at " + Hex32(e.address) + " (" + e.label +
                      ") does not hold the patched bytes");
    }
  }
  for (auto it = manifest.entries.rbegin(); it != manifest.entries.rend(); ++it) {
    image.WriteBytes(it->address, it->old_bytes);
  }
}

bool VerifyReport::ok() const {
  return std::none_of(entries.begin(), entries.end(), [](const VerifyEntry& e) {
    return e.status == CheckStatus::kFail;
  });
}

std::string VerifyReport::ToText() const {
  std::string out;
  for (const auto& e : entries) {
    char head[64];
    if (e.action_id < 0) {
      std::snprintf(head, sizeof(head), "[%-10s] #- ", CheckStatusName(e.status));
    } else {
      std::snprintf(head, sizeof(head), "[%-10s] #%d ", CheckStatusName(e.status),
                    e.action_id);
    }
    out += head + e.kind + " " + e.label + " @ " + Hex32(e.address);
    if (!e.detail.empty()) out += ": " + e.detail;
    out += "\n";
  }
  out += ok() ? "verify: ok\n" : "verify: FAILED\n";
  return out;
}

std::string VerifyReport::ToJson() const {
  nlohmann::json doc;
  doc["ok"] = ok();
  doc["entries"] = nlohmann::json::array();
  for (const auto& e : entries) {
    doc["entries"].push_back({{"action", e.action_id},
                              {"kind", e.kind},
                              {"label", e.label},
                              {"address", Hex32(e.address)},
                              {"status", CheckStatusName(e.status)},
                              {"detail", e.detail}});
  }
  return doc.dump(2) + "\n";
}

VerifyReport Verify(const FirmwareImage& image, const PatchManifest& manifest,
                    const SymbolMap& syms) {
  VerifyReport report;
  for (const auto& e : manifest.entries) {
    VerifyEntry v;
    v.action_id = e.action_id;
    v.kind = ActionKindName(e.kind);
    v.label = e.label;
    v.address = e.address;
    auto fail = [&](std::string detail) {
      v.status = CheckStatus::kFail;
      v.detail = std::move(detail);
    };

    const auto len = static_cast<std::uint32_t>(e.new_bytes.size());
    if (!image.IsMapped(e.address, len)) {
      fail("range not mapped");
      report.entries.push_back(std::move(v));
      continue;
    }
    Bytes current = image.ReadBytes(e.address, len);

    switch (e.kind) {
      case ActionKind::kInstallStub: {
        auto lines = thumb::Disassemble(
            std::span<const std::uint8_t>(current).first(std::min(e.code_size, len)),
            e.address, &syms);
        std::vector<Address> targets;
        bool clean = true;
        for (const auto& l : lines) {
          if (!l.instr) {
            clean = false;
            break;
          }
          if (l.instr->op == thumb::Op::kBl) {
            targets.push_back(thumb::BranchTarget(*l.instr, l.address));
          }
        }
        if (!clean) {
          fail("stub code does not disassemble");
        } else if (targets != e.call_targets) {
          fail("stub BL targets differ from the manifest");
        } else if (current != e.new_bytes) {
          auto mismatch = std::mismatch(current.begin(), current.end(), e.new_bytes.begin());
          fail("stub byte differs at " +
               Hex32(e.address + static_cast<Address>(mismatch.first - current.begin())));
        } else {
          v.detail = std::to_string(lines.size()) + " instructions, " +
                     std::to_string(targets.size()) + " calls";
        }
        break;
      }
      case ActionKind::kRedirectBranch:
      case ActionKind::kReplaceFunction: {
        auto target = DecodeBranch(e.branch_kind, current, e.address);
        if (!target) {
          fail(std::string("no ") + BranchName(e.branch_kind) + " at site");
        } else if (*target != e.branch_target) {
          fail(std::string(BranchName(e.branch_kind)) + " targets " +
               Hex32(*target) + ", expected " + Hex32(e.branch_target));
        } else {
          v.detail = std::string(BranchName(e.branch_kind)) + " -> " + Hex32(*target);
          if (auto sym = syms.ReverseLookup(*target)) v.detail += " (" + sym->name + ")";
        }
        break;
      }
      case ActionKind::kOrWord: {
        std::uint32_t w = image.ReadWord(e.address);
        if (e.bits == 0) {
          v.status = CheckStatus::kDegenerate;
          v.detail = "zero mask, nothing to set";
        } else if ((w & e.bits) != e.bits) {
          fail("word " + Hex32(w) + " lacks bits " + Hex32(e.bits & ~w));
        } else {
          v.detail = "word " + Hex32(w) + " contains " + Hex32(e.bits);
        }
        break;
      }
    }
    report.entries.push_back(std::move(v));
  }

  for (const auto& trap : manifest.traps) {
    VerifyEntry v;
    v.action_id = -1;
    v.kind = "trap";
    v.label = trap.handler;
    v.address = trap.address;
    bool inside = std::any_of(
        manifest.entries.begin(), manifest.entries.end(), [&](const ManifestEntry& e) {
          return e.kind == ActionKind::kInstallStub && trap.address >= e.address &&
                 std::uint64_t{trap.address} + 4 <= e.end();
        });
    if (!inside) {
      v.status = CheckStatus::kFail;
      v.detail = "trap slot is not inside an installed stub";
    }
    report.entries.push_back(std::move(v));
  }
  return report;
}

std::vector<PatchAction> MakeMonitorPatchset(const SymbolMap& syms,
                                             const MctlBits& mctl) {
  for (const char* name : {"wlc_bmac_recv", "coreinit_mctrl_mask_word",
                           "coreinit_mctrl_value_word"}) {
    if (!syms.Lookup(name)) PlanError(std::string("monitor patch set needs symbol ") + name);
  }
  return {
      InstallStub{"monitor_recv", NativeTrap{"monitor_recv"}, std::nullopt},
      ReplaceFunction{"wlc_bmac_recv", StubRef{"monitor_recv"}},
      OrWord{std::string("coreinit_mctrl_mask_word"), mctl.combined()},
      OrWord{std::string("coreinit_mctrl_value_word"), mctl.combined()},
  };
}

std::vector<PatchAction> MakeHelloWorldPatchset(const SymbolMap& syms) {
  auto veneer = syms.Lookup("wlc_bmac_recv_rx_veneer");
  if (!veneer || !syms.Lookup("dma_rx") || !syms.Lookup("printf")) {
    PlanError("hello-world patch set needs printf, dma_rx and wlc_bmac_recv_rx_veneer");
  }
  return {
      InstallStub{"dma_rx_hook", HelloWorldProgram(), std::nullopt},
      RedirectBranch{veneer->address + 2, StubRef{"dma_rx_hook"}, BranchKind::kBl},
  };
}

namespace {

std::string ToHex(const Bytes& b) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(b.size() * 2);
  for (auto x : b) {
    s += digits[x >> 4];
    s += digits[x & 15];
  }
  return s;
}

Bytes FromHex(const std::string& s) {
  if (s.size() % 2) throw Error(ErrorCode::kParse, "odd-length hex string");
  Bytes out;
  out.reserve(s.size() / 2);
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw Error(ErrorCode::kParse, std::string("bad hex digit '") + c + "'");
  };
  for (std::size_t i = 0; i < s.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(nibble(s[i]) << 4 | nibble(s[i + 1])));
  }
  return out;
}

std::uint32_t ParseU32(const nlohmann::json& j, const char* what) {
  if (j.is_number_unsigned() && j.get<std::uint64_t>() <= 0xFFFFFFFFull) {
    return static_cast<std::uint32_t>(j.get<std::uint64_t>());
  }
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    try {
      std::size_t used = 0;
      auto v = std::stoull(s, &used, 0);
      if (used == s.size() && v <= 0xFFFFFFFFull) return static_cast<std::uint32_t>(v);
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorCode::kParse, std::string("manifest: bad value for ") + what);
}

std::optional<ActionKind> ParseActionKind(const std::string& s) {
  for (auto k : {ActionKind::kInstallStub, ActionKind::kRedirectBranch,
                 ActionKind::kReplaceFunction, ActionKind::kOrWord}) {
    if (s == ActionKindName(k)) return k;
  }
  return std::nullopt;
}

}  // namespace

std::string SerializeManifest(const PatchManifest& m) {
  nlohmann::ordered_json doc;
  doc["format"] = "fwhook-manifest/1";
  doc["patchset"] = m.patchset;
  doc["placement_base"] = Hex32(m.placement_base);
  if (m.mctl) {
    doc["mctl"] = {{"promisc", Hex32(m.mctl->promisc)},
                   {"keepcontrol", Hex32(m.mctl->keepcontrol)},
                   {"bcns_promisc", Hex32(m.mctl->bcns_promisc)},
                   {"keepbadfcs", Hex32(m.mctl->keepbadfcs)},
                   {"combined", Hex32(m.mctl->combined())}};
  }
  doc["edits"] = nlohmann::ordered_json::array();
  for (const auto& e : m.entries) {
    nlohmann::ordered_json j;
    j["action"] = e.action_id;
    j["kind"] = ActionKindName(e.kind);
    j["label"] = e.label;
    j["address"] = Hex32(e.address);
    j["length"] = e.new_bytes.size();
    j["old"] = ToHex(e.old_bytes);
    j["new"] = ToHex(e.new_bytes);
    switch (e.kind) {
      case ActionKind::kInstallStub: {
        j["code_size"] = e.code_size;
        auto calls = nlohmann::ordered_json::array();
        for (Address a : e.call_targets) calls.push_back(Hex32(a));
        j["calls"] = calls;
        break;
      }
      case ActionKind::kRedirectBranch:
      case ActionKind::kReplaceFunction:
        j["branch"] = e.branch_kind == BranchKind::kBl ? "BL" : "B.W";
        j["target"] = Hex32(e.branch_target);
        break;
      case ActionKind::kOrWord:
        j["bits"] = Hex32(e.bits);
        break;
    }
    doc["edits"].push_back(std::move(j));
  }
  doc["traps"] = nlohmann::ordered_json::array();
  for (const auto& t : m.traps) {
    doc["traps"].push_back({{"address", Hex32(t.address)}, {"handler", t.handler}});
  }
  return doc.dump(2) + "\n";
}

PatchManifest ParseManifest(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("manifest: ") + e.what());
  }
  try {
    if (!doc.is_object() || doc.value("format", "") != "fwhook-manifest/1") {
      throw Error(ErrorCode::kParse, "manifest: missing or unknown format tag");
    }
    PatchManifest m;
    m.patchset = doc.at("patchset").get<std::string>();
    m.placement_base = ParseU32(doc.at("placement_base"), "placement_base");
    if (doc.contains("mctl")) {
      const auto& j = doc["mctl"];
      MctlBits bits;
      bits.promisc = ParseU32(j.at("promisc"), "mctl.promisc");
      bits.keepcontrol = ParseU32(j.at("keepcontrol"), "mctl.keepcontrol");
      bits.bcns_promisc = ParseU32(j.at("bcns_promisc"), "mctl.bcns_promisc");
      bits.keepbadfcs = ParseU32(j.at("keepbadfcs"), "mctl.keepbadfcs");
      m.mctl = bits;
    }
    for (const auto& j : doc.at("edits")) {
      ManifestEntry e;
      e.action_id = j.at("action").get<int>();
      auto kind = ParseActionKind(j.at("kind").get<std::string>());
      if (!kind) throw Error(ErrorCode::kParse, "manifest: unknown edit kind");
      e.kind = *kind;
      e.label = j.value("label", "");
      e.address = ParseU32(j.at("address"), "address");
      e.old_bytes = FromHex(j.at("old").get<std::string>());
      e.new_bytes = FromHex(j.at("new").get<std::string>());
      if (e.old_bytes.size() != e.new_bytes.size() ||
          (j.contains("length") && j["length"].get<std::size_t>() != e.new_bytes.size())) {
        throw Error(ErrorCode::kParse, "manifest: edit length mismatch at " + Hex32(e.address));
      }
      switch (e.kind) {
        case ActionKind::kInstallStub:
          e.code_size = j.at("code_size").get<std::uint32_t>();
          for (const auto& c : j.at("calls")) e.call_targets.push_back(ParseU32(c, "calls"));
          break;
        case ActionKind::kRedirectBranch:
        case ActionKind::kReplaceFunction: {
          auto b = j.at("branch").get<std::string>();
          if (b != "BL" && b != "B.W") throw Error(ErrorCode::kParse, "manifest: bad branch kind");
          e.branch_kind = b == "BL" ? BranchKind::kBl : BranchKind::kBW;
          e.branch_target = ParseU32(j.at("target"), "target");
          break;
        }
        case ActionKind::kOrWord:
          e.bits = ParseU32(j.at("bits"), "bits");
          break;
      }
      m.entries.push_back(std::move(e));
    }
    for (const auto& j : doc.at("traps")) {
      m.traps.push_back({ParseU32(j.at("address"), "trap address"),
                         j.at("handler").get<std::string>()});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("manifest: ") + e.what());
  }
}

}  // namespace fwhook

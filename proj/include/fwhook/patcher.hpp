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

// Plans, applies, verifies and rolls back patch sets against a FirmwareImage.
// A plan records, for every edited range, the bytes found at plan time and the
// bytes to write; the same record serves as the manifest after application.

#ifndef FWHOOK_PATCHER_HPP_
#define FWHOOK_PATCHER_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fwhook/firmware_image.hpp"
#include "fwhook/hook_program.hpp"

namespace fwhook {

class SymbolMap;

// maccontrol flags the monitor patch forces on. Defaults follow brcmsmac d11.h.
struct MctlBits {
  std::uint32_t promisc = 1u << 24;
  std::uint32_t keepcontrol = 1u << 22;
  std::uint32_t bcns_promisc = 1u << 20;
  std::uint32_t keepbadfcs = 1u << 23;

  std::uint32_t combined() const {
    return promisc | keepcontrol | bcns_promisc | keepbadfcs;
  }
  // Throws kInvalidArgument unless all four are distinct single bits.
  // All-zero is accepted; verify then reports the or_word edits as degenerate.
  void Validate() const;

  bool operator==(const MctlBits&) const = default;
};

enum class BranchKind { kBl, kBW };

struct AddressRef {
  Address address;
  bool operator==(const AddressRef&) const = default;
};
struct SymbolRef {
  std::string name;
  bool operator==(const SymbolRef&) const = default;
};
// Base address of a stub installed by the same patch set.
struct StubRef {
  std::string label;
  bool operator==(const StubRef&) const = default;
};
using TargetRef = std::variant<AddressRef, SymbolRef, StubRef>;

// Stub whose body only forwards r0-r3 to a trap slot handled natively.
struct NativeTrap {
  std::string tag;
  bool operator==(const NativeTrap&) const = default;
};

struct InstallStub {
  std::string label;
  std::variant<HookProgram, NativeTrap> body;
  std::optional<Address> at;  // default: next free slot in the placement window
  bool operator==(const InstallStub&) const = default;
};
struct RedirectBranch {
  Address site;
  TargetRef target;
  BranchKind kind = BranchKind::kBl;
  bool operator==(const RedirectBranch&) const = default;
};
// Overwrites the function's first 4 bytes with B.W to `target`.
struct ReplaceFunction {
  std::string symbol;
  TargetRef target;
  bool operator==(const ReplaceFunction&) const = default;
};
struct OrWord {
  std::variant<std::string, Address> word;
  std::uint32_t bits = 0;
  bool operator==(const OrWord&) const = default;
};
using PatchAction = std::variant<InstallStub, RedirectBranch, ReplaceFunction, OrWord>;

enum class ActionKind { kInstallStub, kRedirectBranch, kReplaceFunction, kOrWord };
const char* ActionKindName(ActionKind kind);

struct ManifestEntry {
  int action_id = 0;
  ActionKind kind = ActionKind::kInstallStub;
  std::string label;
  Address address = 0;
  Bytes old_bytes;
  Bytes new_bytes;

  // install_stub: code length and the BL targets it must contain, in order.
  std::uint32_t code_size = 0;
  std::vector<Address> call_targets;
  // redirect_branch / replace_function
  BranchKind branch_kind = BranchKind::kBW;
  Address branch_target = 0;
  // or_word
  std::uint32_t bits = 0;

  std::uint64_t end() const { return std::uint64_t{address} + new_bytes.size(); }
  bool operator==(const ManifestEntry&) const = default;
};

struct TrapRegistration {
  Address address = 0;
  std::string handler;
  bool operator==(const TrapRegistration&) const = default;
};

struct PatchManifest {
  std::string patchset;
  Address placement_base = 0;
  std::optional<MctlBits> mctl;
  std::vector<ManifestEntry> entries;
  std::vector<TrapRegistration> traps;

  bool operator==(const PatchManifest&) const = default;
};

// A plan is a manifest that has not been written yet.
using PlannedPatch = PatchManifest;

struct PatchConfig {
  Address placement_base = 0x180000;
  Address placement_limit = 0x180E00;  // exclusive
};

// Deterministic. Throws kPlan on placement exhaustion, overlaps, unreachable
// branches, redirect sites that are not branches, or unresolved symbols.
PlannedPatch Plan(const std::vector<PatchAction>& actions,
                  const FirmwareImage& image, const SymbolMap& syms,
                  const PatchConfig& config, std::string patchset = "custom");

// All-or-nothing. Throws kPlan if any range no longer holds its old bytes.
PatchManifest Apply(const PlannedPatch& plan, FirmwareImage& image);

// Restores every range to its old bytes. Throws kPlan if the image does not
// currently hold the manifest's new bytes.
void Rollback(const PatchManifest& manifest, FirmwareImage& image);

enum class CheckStatus { kPass, kFail, kDegenerate };
const char* CheckStatusName(CheckStatus status);

struct VerifyEntry {
  int action_id = 0;
  std::string kind;
  std::string label;
  Address address = 0;
  CheckStatus status = CheckStatus::kPass;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyEntry> entries;
  // True when nothing failed; degenerate entries are warnings.
  bool ok() const;
  std::string ToText() const;
  std::string ToJson() const;
};

VerifyReport Verify(const FirmwareImage& image, const PatchManifest& manifest,
                    const SymbolMap& syms);

std::vector<PatchAction> MakeMonitorPatchset(const SymbolMap& syms,
                                             const MctlBits& mctl);
std::vector<PatchAction> MakeHelloWorldPatchset(const SymbolMap& syms);

std::string SerializeManifest(const PatchManifest& manifest);
PatchManifest ParseManifest(std::string_view json_text);

}  // namespace fwhook

#endif  // FWHOOK_PATCHER_HPP_

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

// Run configuration shared by the patch and sim workflows, and the scripted
// corpus run: boot, inject in batches, dispatch, deliver to the host, capture.

#ifndef FWHOOK_PIPELINE_HPP_
#define FWHOOK_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fwhook/capture.hpp"
#include "fwhook/chip_sim.hpp"
#include "fwhook/patcher.hpp"

namespace fwhook {

struct RunConfig {
  PatchConfig patch;
  SimConfig sim;
  std::uint32_t batch_size = 4;  // frames injected per interrupt
};

// Applies the keys of a JSON object on top of `base`. Keys: placement_base,
// placement_limit, rxbnd, mctl{promisc, keepcontrol, bcns_promisc,
// keepbadfcs}, stock_data_channel, corrected_loop, ring_capacity, batch_size,
// headroom, fuel, sta_mac, joined_bssid. Addresses and masks may be hex
// strings. Unknown keys are rejected. Throws kParse or kInvalidArgument.
RunConfig ParseRunConfig(std::string_view json_text, const RunConfig& base = {});
RunConfig LoadRunConfig(const std::filesystem::path& path, const RunConfig& base = {});
std::string SerializeRunConfig(const RunConfig& config);

struct Corpus {
  std::vector<Dot11Frame> frames;
  std::optional<CorpusSpec> spec;  // set when loaded from a spec file
};

// Accepts a radiotap pcap or a corpus spec JSON document.
Corpus LoadCorpus(std::span<const std::uint8_t> bytes);

struct SimRun {
  std::unique_ptr<Simulator> sim;
  HostDelivery delivery;
  PcapFile pcap;  // radiotap records in patched mode, Ethernet in stock mode
};

// force_stock rejects manifests that register the monitor handler.
SimRun RunCorpus(FirmwareImage image, const SymbolMap& syms,
                 const PatchManifest* manifest, const Corpus& corpus,
                 const RunConfig& config, bool force_stock = false);

}  // namespace fwhook

#endif  // FWHOOK_PIPELINE_HPP_

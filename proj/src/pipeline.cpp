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

#include "fwhook/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "fwhook/error.hpp"

namespace fwhook {

namespace {

[[noreturn]] void ConfigError(const std::string& what) {
  throw Error(ErrorCode::kParse, "config: " + what);
}

std::uint64_t ToNumber(const nlohmann::json& j, const std::string& key,
                       std::uint64_t max = 0xFFFFFFFFull) {
  std::uint64_t v = 0;
  if (j.is_number_unsigned()) {
    v = j.get<std::uint64_t>();
  } else if (j.is_number_integer()) {
    ConfigError(key + " must not be negative");
  } else if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    std::size_t used = 0;
    try {
      v = std::stoull(s, &used, 0);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) ConfigError(key + ": '" + s + "' is not a number");
  } else {
    ConfigError(key + " must be a number or a hex string");
  }
  if (v > max) ConfigError(key + " is out of range");
  return v;
}

bool ToBool(const nlohmann::json& j, const std::string& key) {
  if (!j.is_boolean()) ConfigError(key + " must be true or false");
  return j.get<bool>();
}

MacAddr ToMac(const nlohmann::json& j, const std::string& key) {
  if (!j.is_string()) ConfigError(key + " must be a MAC string");
  return ParseMac(j.get<std::string>());
}

}  // namespace

RunConfig ParseRunConfig(std::string_view json_text, const RunConfig& base) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    ConfigError(e.what());
  }
  if (!doc.is_object()) ConfigError("expected a JSON object");

  RunConfig c = base;
  for (const auto& [key, v] : doc.items()) {
    if (key == "placement_base") {
      c.patch.placement_base = static_cast<Address>(ToNumber(v, key));
    } else if (key == "placement_limit") {
      c.patch.placement_limit = static_cast<Address>(ToNumber(v, key));
    } else if (key == "rxbnd") {
      c.sim.rxbnd = static_cast<std::uint32_t>(ToNumber(v, key, 1u << 16));
    } else if (key == "stock_data_channel") {
      c.sim.stock_data_channel = static_cast<std::uint8_t>(ToNumber(v, key, 0xFF));
    } else if (key == "corrected_loop") {
      c.sim.corrected_loop = ToBool(v, key);
    } else if (key == "ring_capacity") {
      c.sim.ring_capacity = static_cast<std::uint32_t>(ToNumber(v, key, 1u << 16));
    } else if (key == "batch_size") {
      c.batch_size = static_cast<std::uint32_t>(ToNumber(v, key, 1u << 16));
    } else if (key == "headroom") {
      c.sim.headroom = static_cast<std::uint32_t>(ToNumber(v, key, 1u << 16));
    } else if (key == "fuel") {
      c.sim.fuel = ToNumber(v, key, ~std::uint64_t{0});
    } else if (key == "sta_mac") {
      c.sim.sta_mac = ToMac(v, key);
    } else if (key == "joined_bssid") {
      c.sim.joined_bssid = ToMac(v, key);
    } else if (key == "mctl") {
      if (!v.is_object()) ConfigError("mctl must be an object");
      for (const auto& [bit, m] : v.items()) {
        const std::string name = "mctl." + bit;
        auto value = static_cast<std::uint32_t>(ToNumber(m, name));
        if (bit == "promisc") {
          c.sim.mctl.promisc = value;
        } else if (bit == "keepcontrol") {
          c.sim.mctl.keepcontrol = value;
        } else if (bit == "bcns_promisc") {
          c.sim.mctl.bcns_promisc = value;
        } else if (bit == "keepbadfcs") {
          c.sim.mctl.keepbadfcs = value;
        } else {
          ConfigError("unknown key '" + name + "'");
        }
      }
    } else {
      ConfigError("unknown key '" + key + "'");
    }
  }
  if (c.batch_size == 0) {
    throw Error(ErrorCode::kInvalidArgument, "config: batch_size must be positive");
  }
  if (c.patch.placement_limit <= c.patch.placement_base) {
    throw Error(ErrorCode::kInvalidArgument,
                "config: placement_limit must be above placement_base");
  }
  c.sim.Validate();
  return c;
}

RunConfig LoadRunConfig(const std::filesystem::path& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return ParseRunConfig(text, base);
}

std::string SerializeRunConfig(const RunConfig& c) {
  nlohmann::ordered_json doc;
  doc["placement_base"] = Hex32(c.patch.placement_base);
  doc["placement_limit"] = Hex32(c.patch.placement_limit);
  doc["rxbnd"] = c.sim.rxbnd;
  doc["mctl"] = {{"promisc", Hex32(c.sim.mctl.promisc)},
                 {"keepcontrol", Hex32(c.sim.mctl.keepcontrol)},
                 {"bcns_promisc", Hex32(c.sim.mctl.bcns_promisc)},
                 {"keepbadfcs", Hex32(c.sim.mctl.keepbadfcs)}};
  doc["stock_data_channel"] = c.sim.stock_data_channel;
  doc["corrected_loop"] = c.sim.corrected_loop;
  doc["ring_capacity"] = c.sim.ring_capacity;
  doc["batch_size"] = c.batch_size;
  doc["headroom"] = c.sim.headroom;
  doc["fuel"] = c.sim.fuel;
  doc["sta_mac"] = FormatMac(c.sim.sta_mac);
  doc["joined_bssid"] = FormatMac(c.sim.joined_bssid);
  return doc.dump(2) + "\n";
}

Corpus LoadCorpus(std::span<const std::uint8_t> bytes) {
  Corpus corpus;
  if (bytes.size() >= 4 && bytes[0] == 0xD4 && bytes[1] == 0xC3 && bytes[2] == 0xB2 &&
      bytes[3] == 0xA1) {
    corpus.frames = CorpusFromPcap(ParsePcap(bytes));
    return corpus;
  }
  corpus.spec = ParseCorpusSpec(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  corpus.frames = GenCorpus(*corpus.spec);
  return corpus;
}

SimRun RunCorpus(FirmwareImage image, const SymbolMap& syms,
                 const PatchManifest* manifest, const Corpus& corpus,
                 const RunConfig& config, bool force_stock) {
  if (force_stock && manifest != nullptr &&
      std::any_of(manifest->traps.begin(), manifest->traps.end(),
                  [](const TrapRegistration& t) { return t.handler == "monitor_recv"; })) {
    throw Error(ErrorCode::kInvalidArgument,
                "stock mode cannot run a manifest that replaces wlc_bmac_recv");
  }
  if (config.batch_size == 0) {
    throw Error(ErrorCode::kInvalidArgument, "batch_size must be positive");
  }
  SimConfig sc = config.sim;
  if (corpus.spec) {
    sc.sta_mac = corpus.spec->sta_mac;
    sc.joined_bssid = corpus.spec->joined_bssid;
  }

  SimRun run;
  run.sim = std::make_unique<Simulator>(std::move(image), syms, manifest, sc);
  Simulator& sim = *run.sim;

  auto service = [&] {
    if (!sim.interrupt_pending() && sim.ring().queue.empty()) return;
    sim.DispatchInterrupt();
    // Leftovers beyond rxbnd get further interrupts.
    for (std::uint32_t guard = 0; !sim.ring().queue.empty() && guard <= sim.ring().capacity;
         ++guard) {
      sim.DispatchInterrupt();
    }
  };
  std::uint32_t in_batch = 0;
  for (const auto& f : corpus.frames) {
    sim.InjectAirFrame(f);
    if (++in_batch == config.batch_size) {
      in_batch = 0;
      service();
    }
  }
  service();

  run.delivery = HostDeliver(sim.host_queue());
  const bool monitor = sim.mode() == SimMode::kPatched;
  run.pcap.linktype = monitor ? kLinktypeRadiotap : kLinktypeEthernet;
  run.pcap.records = StampRecords(monitor ? run.delivery.monitor : run.delivery.ethernet);
  return run;
}

}  // namespace fwhook

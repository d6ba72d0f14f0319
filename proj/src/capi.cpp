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

#include "fwhook/fwhook.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "fwhook/baseline_image.hpp"
#include "fwhook/error.hpp"
#include "fwhook/firmware_image.hpp"
#include "fwhook/patcher.hpp"
#include "fwhook/pipeline.hpp"
#include "fwhook/symbol_map.hpp"
#include "fwhook/thumb.hpp"

struct fwh_symbols {
  fwhook::SymbolMap map;
};
struct fwh_image {
  fwhook::FirmwareImage image;
};
struct fwh_config {
  fwhook::RunConfig config;
};
struct fwh_sim {
  fwhook::SimRun run;
  fwhook::Bytes pcap;
};

namespace {

thread_local std::string g_last_error;

fwh_status StatusFor(fwhook::ErrorCode code) {
  using fwhook::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return FWH_E_INVALID_ARGUMENT;
    case ErrorCode::kIo: return FWH_E_IO;
    case ErrorCode::kRange: return FWH_E_RANGE;
    case ErrorCode::kWriteProtect: return FWH_E_WRITE_PROTECT;
    case ErrorCode::kOverlap: return FWH_E_OVERLAP;
    case ErrorCode::kParse: return FWH_E_PARSE;
    case ErrorCode::kEncode: return FWH_E_ENCODE;
    case ErrorCode::kDecode: return FWH_E_DECODE;
    case ErrorCode::kPlan: return FWH_E_PLAN;
    case ErrorCode::kVerify: return FWH_E_VERIFY;
    case ErrorCode::kSim: return FWH_E_SIM;
  }
  return FWH_E_INTERNAL;
}

fwh_status Fail(fwh_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename F>
fwh_status Guard(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const fwhook::Error& e) {
    return Fail(StatusFor(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(FWH_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(FWH_E_INTERNAL, e.what());
  }
}

char* CopyString(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

std::uint8_t* CopyBytes(const fwhook::Bytes& b) {
  auto* p = static_cast<std::uint8_t*>(std::malloc(b.empty() ? 1 : b.size()));
  if (p == nullptr) throw std::bad_alloc();
  if (!b.empty()) std::memcpy(p, b.data(), b.size());
  return p;
}

#define FWH_REQUIRE(cond)                                                     \
  do {                                                                        \
    if (!(cond)) return Fail(FWH_E_INVALID_ARGUMENT, "null argument: " #cond); \
  } while (0)

}  // namespace

extern "C" {

const char* fwh_version(void) { return "1.0.0"; }

const char* fwh_status_name(fwh_status status) {
  switch (status) {
    case FWH_OK: return "ok";
    case FWH_E_INVALID_ARGUMENT: return "invalid-argument";
    case FWH_E_IO: return "io";
    case FWH_E_RANGE: return "range";
    case FWH_E_WRITE_PROTECT: return "write-protect";
    case FWH_E_OVERLAP: return "overlap";
    case FWH_E_PARSE: return "parse";
    case FWH_E_ENCODE: return "encode";
    case FWH_E_DECODE: return "decode";
    case FWH_E_PLAN: return "plan";
    case FWH_E_VERIFY: return "verify";
    case FWH_E_SIM: return "sim";
    case FWH_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* fwh_last_error(void) { return g_last_error.c_str(); }

void fwh_free(void* p) { std::free(p); }

fwh_status fwh_symbols_builtin(fwh_symbols** out) {
  FWH_REQUIRE(out);
  return Guard([&] {
    *out = new fwh_symbols{fwhook::BuiltinSymbolMap()};
    return FWH_OK;
  });
}

fwh_status fwh_symbols_load(const char* path, fwh_symbols** out) {
  FWH_REQUIRE(path && out);
  return Guard([&] {
    *out = new fwh_symbols{fwhook::LoadSymbolMap(path)};
    return FWH_OK;
  });
}

fwh_status fwh_symbols_lookup(const fwh_symbols* syms, const char* name,
                              uint32_t* address) {
  FWH_REQUIRE(syms && name && address);
  return Guard([&] {
    *address = syms->map.Require(name);
    return FWH_OK;
  });
}

fwh_status fwh_symbols_save(const fwh_symbols* syms, const char* path) {
  FWH_REQUIRE(syms && path);
  return Guard([&] {
    fwhook::SaveSymbolMap(syms->map, path);
    return FWH_OK;
  });
}

void fwh_symbols_free(fwh_symbols* syms) { delete syms; }

fwh_status fwh_image_baseline(const fwh_symbols* syms, fwh_image** out) {
  FWH_REQUIRE(syms && out);
  return Guard([&] {
    *out = new fwh_image{fwhook::BuildBaselineImage(syms->map)};
    return FWH_OK;
  });
}

fwh_status fwh_image_load(const char* ram_path, const char* rom_path, fwh_image** out) {
  FWH_REQUIRE(ram_path && out);
  return Guard([&] {
    auto img = std::make_unique<fwh_image>();
    if (rom_path != nullptr) {
      img->image.LoadRegion(rom_path, "rom", fwhook::kRomBase, false);
    } else {
      img->image.AddRegion({"rom", fwhook::kRomBase, false,
                            fwhook::Bytes(fwhook::kRomSize, 0)});
    }
    img->image.LoadRegion(ram_path, "ram", fwhook::kRamBase, true);
    *out = img.release();
    return FWH_OK;
  });
}

fwh_status fwh_image_save_region(const fwh_image* image, const char* region,
                                 const char* path) {
  FWH_REQUIRE(image && region && path);
  return Guard([&] {
    image->image.DumpRegion(region, path);
    return FWH_OK;
  });
}

fwh_status fwh_image_read(const fwh_image* image, uint32_t address, uint32_t length,
                          uint8_t* buffer) {
  FWH_REQUIRE(image && (buffer || length == 0));
  return Guard([&] {
    auto bytes = image->image.ReadBytes(address, length);
    if (length != 0) std::memcpy(buffer, bytes.data(), length);
    return FWH_OK;
  });
}

fwh_status fwh_image_hexdump(const fwh_image* image, uint32_t address, uint32_t length,
                             char** text) {
  FWH_REQUIRE(image && text);
  return Guard([&] {
    *text = CopyString(fwhook::HexDump(image->image.ReadBytes(address, length), address));
    return FWH_OK;
  });
}

fwh_status fwh_image_disasm(const fwh_image* image, const fwh_symbols* syms,
                            uint32_t address, uint32_t count, char** text) {
  FWH_REQUIRE(image && text);
  return Guard([&] {
    auto lines = fwhook::thumb::DisassembleImage(image->image, address, count,
                                                 syms ? &syms->map : nullptr);
    *text = CopyString(fwhook::thumb::FormatListing(lines));
    return FWH_OK;
  });
}

void fwh_image_free(fwh_image* image) { delete image; }

fwh_status fwh_config_create(const char* path, const char* overrides, fwh_config** out) {
  FWH_REQUIRE(out);
  return Guard([&] {
    fwhook::RunConfig c;
    if (path != nullptr) c = fwhook::LoadRunConfig(path, c);
    if (overrides != nullptr) c = fwhook::ParseRunConfig(overrides, c);
    *out = new fwh_config{c};
    return FWH_OK;
  });
}

fwh_status fwh_config_json(const fwh_config* config, char** json) {
  FWH_REQUIRE(config && json);
  return Guard([&] {
    *json = CopyString(fwhook::SerializeRunConfig(config->config));
    return FWH_OK;
  });
}

void fwh_config_free(fwh_config* config) { delete config; }

fwh_status fwh_patch(fwh_image* image, const fwh_symbols* syms, const fwh_config* config,
                     const char* patchset, char** manifest_json, char** verify_report) {
  FWH_REQUIRE(image && syms && patchset && manifest_json);
  return Guard([&] {
    const fwhook::RunConfig cfg = config ? config->config : fwhook::RunConfig{};
    const std::string name = patchset;
    std::vector<fwhook::PatchAction> actions;
    std::optional<fwhook::MctlBits> mctl;
    if (name == "monitor") {
      cfg.sim.mctl.Validate();
      actions = fwhook::MakeMonitorPatchset(syms->map, cfg.sim.mctl);
      mctl = cfg.sim.mctl;
    } else if (name == "helloworld") {
      actions = fwhook::MakeHelloWorldPatchset(syms->map);
    } else {
      return Fail(FWH_E_INVALID_ARGUMENT,
                  "unknown patch set '" + name + "' (expected monitor or helloworld)");
    }
    auto plan = fwhook::Plan(actions, image->image, syms->map, cfg.patch, name);
    plan.mctl = mctl;
    auto manifest = fwhook::Apply(plan, image->image);
    auto report = fwhook::Verify(image->image, manifest, syms->map);
    *manifest_json = CopyString(fwhook::SerializeManifest(manifest));
    if (verify_report != nullptr) *verify_report = CopyString(report.ToText());
    if (!report.ok()) return Fail(FWH_E_VERIFY, "verification failed after apply");
    return FWH_OK;
  });
}

fwh_status fwh_verify(const fwh_image* image, const fwh_symbols* syms,
                      const char* manifest_json, int as_json, char** report) {
  FWH_REQUIRE(image && syms && manifest_json && report);
  return Guard([&] {
    auto manifest = fwhook::ParseManifest(manifest_json);
    auto r = fwhook::Verify(image->image, manifest, syms->map);
    *report = CopyString(as_json ? r.ToJson() : r.ToText());
    if (!r.ok()) return Fail(FWH_E_VERIFY, "verification failed");
    return FWH_OK;
  });
}

fwh_status fwh_rollback(fwh_image* image, const char* manifest_json) {
  FWH_REQUIRE(image && manifest_json);
  return Guard([&] {
    fwhook::Rollback(fwhook::ParseManifest(manifest_json), image->image);
    return FWH_OK;
  });
}

fwh_status fwh_corpus_generate(const char* spec_json, uint8_t** pcap, size_t* length) {
  FWH_REQUIRE(spec_json && pcap && length);
  return Guard([&] {
    auto frames = fwhook::GenCorpus(fwhook::ParseCorpusSpec(spec_json));
    auto bytes = fwhook::SerializePcap(fwhook::CorpusToPcap(frames));
    *pcap = CopyBytes(bytes);
    *length = bytes.size();
    return FWH_OK;
  });
}

fwh_status fwh_sim_run(const fwh_image* image, const fwh_symbols* syms,
                       const char* manifest_json, const fwh_config* config,
                       const uint8_t* corpus, size_t corpus_length, int force_stock,
                       fwh_sim** out) {
  FWH_REQUIRE(image && syms && (corpus || corpus_length == 0) && out);
  return Guard([&] {
    std::optional<fwhook::PatchManifest> manifest;
    if (manifest_json != nullptr) manifest = fwhook::ParseManifest(manifest_json);
    auto c = fwhook::LoadCorpus({corpus, corpus_length});
    auto sim = std::make_unique<fwh_sim>();
    sim->run = fwhook::RunCorpus(image->image, syms->map, manifest ? &*manifest : nullptr,
                                 c, config ? config->config : fwhook::RunConfig{},
                                 force_stock != 0);
    sim->pcap = fwhook::SerializePcap(sim->run.pcap);
    *out = sim.release();
    return FWH_OK;
  });
}

int fwh_sim_is_patched(const fwh_sim* sim) {
  return sim && sim->run.sim->mode() == fwhook::SimMode::kPatched;
}

uint32_t fwh_sim_linktype(const fwh_sim* sim) { return sim ? sim->run.pcap.linktype : 0; }

size_t fwh_sim_record_count(const fwh_sim* sim) {
  return sim ? sim->run.pcap.records.size() : 0;
}

uint32_t fwh_sim_maccontrol(const fwh_sim* sim) {
  return sim ? sim->run.sim->maccontrol() : 0;
}

fwh_status fwh_sim_pcap(const fwh_sim* sim, uint8_t** pcap, size_t* length) {
  FWH_REQUIRE(sim && pcap && length);
  return Guard([&] {
    *pcap = CopyBytes(sim->pcap);
    *length = sim->pcap.size();
    return FWH_OK;
  });
}

fwh_status fwh_sim_report(const fwh_sim* sim, char** json) {
  FWH_REQUIRE(sim && json);
  return Guard([&] {
    *json = CopyString(sim->run.sim->ReportJson());
    return FWH_OK;
  });
}

fwh_status fwh_sim_console(const fwh_sim* sim, char** text) {
  FWH_REQUIRE(sim && text);
  return Guard([&] {
    *text = CopyString(sim->run.sim->ConsoleDump());
    return FWH_OK;
  });
}

void fwh_sim_free(fwh_sim* sim) { delete sim; }

}  // extern "C"

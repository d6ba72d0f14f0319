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

// fwhook: command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fwhook/fwhook.h"

namespace {

enum ExitCode {
  kExitOk = 0,
  kExitUsage = 1,
  kExitRange = 2,
  kExitPlan = 3,
  kExitVerify = 4,
  kExitSim = 5,
};

// Carries an exit code out of a subcommand.
struct CliFailure {
  int code;
  std::string message;
};

int ExitFor(fwh_status s) {
  switch (s) {
    case FWH_OK: return kExitOk;
    case FWH_E_RANGE:
    case FWH_E_DECODE:
    case FWH_E_ENCODE:
    case FWH_E_WRITE_PROTECT:
      return kExitRange;
    case FWH_E_PLAN:
    case FWH_E_OVERLAP:
      return kExitPlan;
    case FWH_E_VERIFY: return kExitVerify;
    case FWH_E_SIM: return kExitSim;
    default: return kExitUsage;
  }
}

void Check(fwh_status s, const std::string& what, std::optional<int> code = std::nullopt) {
  if (s == FWH_OK) return;
  throw CliFailure{code.value_or(ExitFor(s)),
                   what + ": " + fwh_status_name(s) + ": " + fwh_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Symbols = std::unique_ptr<fwh_symbols, Deleter<fwh_symbols, fwh_symbols_free>>;
using Image = std::unique_ptr<fwh_image, Deleter<fwh_image, fwh_image_free>>;
using Config = std::unique_ptr<fwh_config, Deleter<fwh_config, fwh_config_free>>;
using Sim = std::unique_ptr<fwh_sim, Deleter<fwh_sim, fwh_sim_free>>;

struct CString {
  char* p = nullptr;
  ~CString() { fwh_free(p); }
  std::string str() const { return p ? p : ""; }
};
struct CBuffer {
  std::uint8_t* p = nullptr;
  std::size_t n = 0;
  ~CBuffer() { fwh_free(p); }
};

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliFailure{kExitUsage, "cannot open " + path};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteBytes(const std::string& path, const void* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw CliFailure{kExitUsage, "cannot write " + path};
}

void WriteText(const std::string& path, const std::string& text) {
  WriteBytes(path, text.data(), text.size());
}

Symbols LoadSymbols(const std::string& path) {
  fwh_symbols* s = nullptr;
  if (path.empty()) {
    Check(fwh_symbols_builtin(&s), "symbols");
  } else {
    Check(fwh_symbols_load(path.c_str(), &s), "symbols", kExitUsage);
  }
  return Symbols(s);
}

Image LoadImage(const std::string& ram, const std::string& rom) {
  fwh_image* img = nullptr;
  Check(fwh_image_load(ram.c_str(), rom.empty() ? nullptr : rom.c_str(), &img), "image",
        kExitUsage);
  return Image(img);
}

Config LoadConfig(const std::string& path, const nlohmann::json& overrides) {
  fwh_config* c = nullptr;
  const std::string text = overrides.empty() ? "" : overrides.dump();
  Check(fwh_config_create(path.empty() ? nullptr : path.c_str(),
                          text.empty() ? nullptr : text.c_str(), &c),
        "config", kExitUsage);
  return Config(c);
}

struct Options {
  std::string config_path;

  std::string image, rom, symbols, out, manifest, corpus, out_pcap, report;
  std::uint32_t addr = 0, len = 0, count = 16;
  std::string patchset;
  bool json = false, stock = false, console = false, corrected_loop = false;
  std::optional<std::uint32_t> rxbnd;

  std::string spec;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> counts;
  std::string sta_mac, bssid;
  std::optional<int> channel;

  std::string out_dir;
};

nlohmann::json Overrides(const Options& o) {
  nlohmann::json j = nlohmann::json::object();
  if (o.rxbnd) j["rxbnd"] = *o.rxbnd;
  if (o.corrected_loop) j["corrected_loop"] = true;
  return j;
}

int CmdDump(const Options& o) {
  auto img = LoadImage(o.image, o.rom);
  if (!o.out.empty()) {
    std::vector<std::uint8_t> buf(o.len);
    Check(fwh_image_read(img.get(), o.addr, o.len, buf.data()), "dump");
    WriteBytes(o.out, buf.data(), buf.size());
    return kExitOk;
  }
  CString text;
  Check(fwh_image_hexdump(img.get(), o.addr, o.len, &text.p), "dump");
  std::cout << text.str();
  return kExitOk;
}

int CmdPatch(const Options& o) {
  auto syms = LoadSymbols(o.symbols);
  auto img = LoadImage(o.image, o.rom);
  auto cfg = LoadConfig(o.config_path, Overrides(o));
  CString manifest, report;
  fwh_status s = fwh_patch(img.get(), syms.get(), cfg.get(), o.patchset.c_str(),
                           &manifest.p, &report.p);
  if (s != FWH_OK && s != FWH_E_VERIFY) Check(s, "patch");
  WriteText(o.manifest, manifest.str());
  Check(fwh_image_save_region(img.get(), "ram", o.out.c_str()), "patch", kExitUsage);
  std::cout << report.str();
  Check(s, "patch");
  return kExitOk;
}

int CmdVerify(const Options& o) {
  auto syms = LoadSymbols(o.symbols);
  auto img = LoadImage(o.image, o.rom);
  const std::string manifest = ReadText(o.manifest);
  CString report;
  fwh_status s = fwh_verify(img.get(), syms.get(), manifest.c_str(), o.json, &report.p);
  std::cout << report.str();
  if (s == FWH_E_PARSE) Check(s, "verify", kExitUsage);
  Check(s, "verify");
  return kExitOk;
}

int CmdSim(const Options& o) {
  auto syms = LoadSymbols(o.symbols);
  auto img = LoadImage(o.image, o.rom);
  auto cfg = LoadConfig(o.config_path, Overrides(o));
  std::string manifest;
  if (!o.manifest.empty()) manifest = ReadText(o.manifest);
  const std::string corpus = ReadText(o.corpus);

  fwh_sim* raw = nullptr;
  fwh_status s = fwh_sim_run(img.get(), syms.get(), o.manifest.empty() ? nullptr : manifest.c_str(),
                             cfg.get(), reinterpret_cast<const std::uint8_t*>(corpus.data()),
                             corpus.size(), o.stock, &raw);
  Check(s, "sim", s == FWH_E_INVALID_ARGUMENT ? kExitUsage : kExitSim);
  Sim sim(raw);

  CBuffer pcap;
  Check(fwh_sim_pcap(sim.get(), &pcap.p, &pcap.n), "sim", kExitSim);
  WriteBytes(o.out_pcap, pcap.p, pcap.n);
  CString report, console;
  Check(fwh_sim_report(sim.get(), &report.p), "sim", kExitSim);
  Check(fwh_sim_console(sim.get(), &console.p), "sim", kExitSim);
  if (!o.report.empty()) WriteText(o.report, report.str());

  std::fprintf(stderr, "sim: %s mode, %zu records, linktype %u -> %s\n",
               fwh_sim_is_patched(sim.get()) ? "patched" : "stock",
               fwh_sim_record_count(sim.get()), fwh_sim_linktype(sim.get()),
               o.out_pcap.c_str());
  if (o.console) {
    std::cout << console.str();
  } else if (o.report.empty()) {
    std::cout << report.str();
  }
  return kExitOk;
}

int CmdDisasm(const Options& o) {
  auto img = LoadImage(o.image, o.rom);
  Symbols syms = LoadSymbols(o.symbols);
  CString text;
  Check(fwh_image_disasm(img.get(), syms.get(), o.addr, o.count, &text.p), "disasm");
  std::cout << text.str();
  return kExitOk;
}

int CmdGenCorpus(const Options& o) {
  std::string spec;
  if (!o.spec.empty()) {
    if (o.seed || !o.counts.empty()) {
      throw CliFailure{kExitUsage, "gen-corpus: --spec excludes --seed/--counts"};
    }
    spec = ReadText(o.spec);
  } else {
    if (!o.seed) throw CliFailure{kExitUsage, "gen-corpus: need --spec or --seed"};
    nlohmann::json j;
    j["seed"] = *o.seed;
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& kv : o.counts) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) {
        throw CliFailure{kExitUsage, "gen-corpus: --counts expects class=N, got '" + kv + "'"};
      }
      try {
        counts[kv.substr(0, eq)] = std::stoul(kv.substr(eq + 1));
      } catch (const std::exception&) {
        throw CliFailure{kExitUsage, "gen-corpus: bad count in '" + kv + "'"};
      }
    }
    j["counts"] = counts;
    if (!o.sta_mac.empty()) j["sta_mac"] = o.sta_mac;
    if (!o.bssid.empty()) j["joined_bssid"] = o.bssid;
    if (o.channel) j["channel"] = *o.channel;
    spec = j.dump();
  }
  CBuffer pcap;
  Check(fwh_corpus_generate(spec.c_str(), &pcap.p, &pcap.n), "gen-corpus", kExitUsage);
  WriteBytes(o.out, pcap.p, pcap.n);
  return kExitOk;
}

int CmdMkfw(const Options& o) {
  auto syms = LoadSymbols(o.symbols);
  fwh_image* raw = nullptr;
  Check(fwh_image_baseline(syms.get(), &raw), "mkfw");
  Image img(raw);
  std::filesystem::create_directories(o.out_dir);
  const auto dir = std::filesystem::path(o.out_dir);
  Check(fwh_image_save_region(img.get(), "ram", (dir / "ram.bin").c_str()), "mkfw", kExitUsage);
  Check(fwh_image_save_region(img.get(), "rom", (dir / "rom.bin").c_str()), "mkfw", kExitUsage);
  Check(fwh_symbols_save(syms.get(), (dir / "symbols.json").c_str()), "mkfw", kExitUsage);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fwhook: firmware patching and receive-path simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fwh_version());
  Options o;
  app.add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);

  auto image_opts = [&](CLI::App* c, const char* name) {
    c->add_option(name, o.image, "RAM image blob")->required()->check(CLI::ExistingFile);
    c->add_option("--rom", o.rom, "ROM image blob (default: zeroed)")->check(CLI::ExistingFile);
  };
  auto symbol_opt = [&](CLI::App* c) {
    c->add_option("--symbols", o.symbols, "symbol map JSON (default: built in)")
        ->check(CLI::ExistingFile);
  };

  auto* dump = app.add_subcommand("dump", "hex dump (or raw copy) of image memory");
  image_opts(dump, "--image");
  dump->add_option("--addr", o.addr, "start address")->required();
  dump->add_option("--len", o.len, "byte count")->required();
  dump->add_option("--out", o.out, "write raw bytes here instead of a hex dump");

  auto* patch = app.add_subcommand("patch", "plan, apply and verify a patch set");
  image_opts(patch, "--ram");
  symbol_opt(patch);
  patch->add_option("--patchset", o.patchset, "monitor or helloworld")
      ->required()
      ->check(CLI::IsMember({"monitor", "helloworld"}));
  patch->add_option("--out", o.out, "patched RAM blob")->required();
  patch->add_option("--manifest", o.manifest, "manifest JSON output")->required();

  auto* verify = app.add_subcommand("verify", "check an image against a manifest");
  image_opts(verify, "--ram");
  symbol_opt(verify);
  verify->add_option("--manifest", o.manifest, "manifest JSON")->required()->check(
      CLI::ExistingFile);
  verify->add_flag("--json", o.json, "JSON report");

  auto* sim = app.add_subcommand("sim", "boot the image and run a corpus through it");
  image_opts(sim, "--ram");
  symbol_opt(sim);
  sim->add_option("--manifest", o.manifest, "manifest of the applied patch set")
      ->check(CLI::ExistingFile);
  sim->add_option("--corpus", o.corpus, "radiotap pcap or corpus spec JSON")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--out-pcap", o.out_pcap, "captured host output")->required();
  sim->add_flag("--stock", o.stock, "run the stock receive path");
  sim->add_option("--report", o.report, "write the JSON report here");
  sim->add_flag("--console", o.console, "print the firmware console to stdout");
  sim->add_option("--rxbnd", o.rxbnd, "receive bound per interrupt");
  sim->add_flag("--corrected-loop", o.corrected_loop, "early-exit monitor loop");

  auto* disasm = app.add_subcommand("disasm", "disassemble Thumb code from an image");
  image_opts(disasm, "--image");
  symbol_opt(disasm);
  disasm->add_option("--addr", o.addr, "start address")->required();
  disasm->add_option("--count", o.count, "instruction count");

  auto* gen = app.add_subcommand("gen-corpus", "write a seeded frame corpus as a pcap");
  gen->add_option("--spec", o.spec, "corpus spec JSON")->check(CLI::ExistingFile);
  gen->add_option("--seed", o.seed, "corpus seed");
  gen->add_option("--counts", o.counts, "class=N pairs")->delimiter(',');
  gen->add_option("--sta-mac", o.sta_mac, "station MAC");
  gen->add_option("--bssid", o.bssid, "joined BSSID");
  gen->add_option("--channel", o.channel, "channel 1-14");
  gen->add_option("--out", o.out, "output pcap")->required();

  auto* mkfw = app.add_subcommand("mkfw", "write the modeled stock firmware blobs");
  symbol_opt(mkfw);
  mkfw->add_option("--out-dir", o.out_dir, "directory for ram.bin, rom.bin, symbols.json")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*dump) return CmdDump(o);
    if (*patch) return CmdPatch(o);
    if (*verify) return CmdVerify(o);
    if (*sim) return CmdSim(o);
    if (*disasm) return CmdDisasm(o);
    if (*gen) return CmdGenCorpus(o);
    if (*mkfw) return CmdMkfw(o);
  } catch (const CliFailure& f) {
    std::fprintf(stderr, "fwhook: %s\n", f.message.c_str());
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fwhook: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}

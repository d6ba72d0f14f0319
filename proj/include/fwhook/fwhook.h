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

/* C interface to the fwhook library. Every object is an opaque handle owned
 * by the caller and released with its *_free function. Functions return a
 * fwh_status; on failure fwh_last_error() describes the problem for the
 * calling thread. Strings and buffers returned through out-parameters are
 * allocated by the library and released with fwh_free(). */

#ifndef FWHOOK_FWHOOK_H_
#define FWHOOK_FWHOOK_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FWH_API __declspec(dllexport)
#else
#define FWH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fwh_status {
  FWH_OK = 0,
  FWH_E_INVALID_ARGUMENT = 1,
  FWH_E_IO = 2,
  FWH_E_RANGE = 3,
  FWH_E_WRITE_PROTECT = 4,
  FWH_E_OVERLAP = 5,
  FWH_E_PARSE = 6,
  FWH_E_ENCODE = 7,
  FWH_E_DECODE = 8,
  FWH_E_PLAN = 9,
  FWH_E_VERIFY = 10,
  FWH_E_SIM = 11,
  FWH_E_INTERNAL = 12
} fwh_status;

typedef struct fwh_symbols fwh_symbols;
typedef struct fwh_image fwh_image;
typedef struct fwh_config fwh_config;
typedef struct fwh_sim fwh_sim;

FWH_API const char* fwh_version(void);
FWH_API const char* fwh_status_name(fwh_status status);
/* Message for the most recent failure on this thread; never NULL. */
FWH_API const char* fwh_last_error(void);
FWH_API void fwh_free(void* p);

/* ---- symbols ---- */
FWH_API fwh_status fwh_symbols_builtin(fwh_symbols** out);
FWH_API fwh_status fwh_symbols_load(const char* path, fwh_symbols** out);
FWH_API fwh_status fwh_symbols_lookup(const fwh_symbols* syms, const char* name,
                                      uint32_t* address);
FWH_API fwh_status fwh_symbols_save(const fwh_symbols* syms, const char* path);
FWH_API void fwh_symbols_free(fwh_symbols* syms);

/* ---- firmware image ---- */
/* The modeled stock firmware: zeroed ROM plus the baseline RAM image. */
FWH_API fwh_status fwh_image_baseline(const fwh_symbols* syms, fwh_image** out);
/* rom_path may be NULL, in which case a zeroed ROM is used. */
FWH_API fwh_status fwh_image_load(const char* ram_path, const char* rom_path,
                                  fwh_image** out);
/* region is "ram" or "rom". */
FWH_API fwh_status fwh_image_save_region(const fwh_image* image, const char* region,
                                         const char* path);
FWH_API fwh_status fwh_image_read(const fwh_image* image, uint32_t address,
                                  uint32_t length, uint8_t* buffer);
FWH_API fwh_status fwh_image_hexdump(const fwh_image* image, uint32_t address,
                                     uint32_t length, char** text);
/* syms may be NULL. */
FWH_API fwh_status fwh_image_disasm(const fwh_image* image, const fwh_symbols* syms,
                                    uint32_t address, uint32_t count, char** text);
FWH_API void fwh_image_free(fwh_image* image);

/* ---- configuration ---- */
/* Defaults, then the JSON file at path (may be NULL), then the JSON object in
 * overrides (may be NULL). Unknown keys are rejected. */
FWH_API fwh_status fwh_config_create(const char* path, const char* overrides,
                                     fwh_config** out);
FWH_API fwh_status fwh_config_json(const fwh_config* config, char** json);
FWH_API void fwh_config_free(fwh_config* config);

/* ---- patching ---- */
/* Plans, applies and verifies "monitor" or "helloworld". The manifest is
 * returned even when verification fails (FWH_E_VERIFY). config may be NULL. */
FWH_API fwh_status fwh_patch(fwh_image* image, const fwh_symbols* syms,
                             const fwh_config* config, const char* patchset,
                             char** manifest_json, char** verify_report);
/* as_json selects the JSON report format. Returns FWH_E_VERIFY on a failing
 * check; the report is filled in either way. */
FWH_API fwh_status fwh_verify(const fwh_image* image, const fwh_symbols* syms,
                              const char* manifest_json, int as_json, char** report);
FWH_API fwh_status fwh_rollback(fwh_image* image, const char* manifest_json);

/* ---- corpus ---- */
/* spec_json follows the corpus spec format; the result is a radiotap pcap. */
FWH_API fwh_status fwh_corpus_generate(const char* spec_json, uint8_t** pcap,
                                       size_t* length);

/* ---- simulation ---- */
/* Boots the image (with manifest_json, which may be NULL), feeds the corpus
 * (radiotap pcap or spec JSON bytes) in batches and collects host output.
 * force_stock rejects monitor manifests. config may be NULL. */
FWH_API fwh_status fwh_sim_run(const fwh_image* image, const fwh_symbols* syms,
                               const char* manifest_json, const fwh_config* config,
                               const uint8_t* corpus, size_t corpus_length,
                               int force_stock, fwh_sim** out);
FWH_API int fwh_sim_is_patched(const fwh_sim* sim);
FWH_API uint32_t fwh_sim_linktype(const fwh_sim* sim);
FWH_API size_t fwh_sim_record_count(const fwh_sim* sim);
FWH_API uint32_t fwh_sim_maccontrol(const fwh_sim* sim);
FWH_API fwh_status fwh_sim_pcap(const fwh_sim* sim, uint8_t** pcap, size_t* length);
FWH_API fwh_status fwh_sim_report(const fwh_sim* sim, char** json);
FWH_API fwh_status fwh_sim_console(const fwh_sim* sim, char** text);
FWH_API void fwh_sim_free(fwh_sim* sim);

#ifdef __cplusplus
}
#endif

#endif /* FWHOOK_FWHOOK_H_ */

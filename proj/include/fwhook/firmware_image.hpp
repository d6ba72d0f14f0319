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

// Modeled chip address space: a ROM and a RAM region plus membytes-style
// accessors. Every access must fall entirely inside one region; there is no
// zero fill for unmapped addresses.

#ifndef FWHOOK_FIRMWARE_IMAGE_HPP_
#define FWHOOK_FIRMWARE_IMAGE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fwhook {

using Address = std::uint32_t;
using Bytes = std::vector<std::uint8_t>;

inline constexpr Address kRomBase = 0x0;
inline constexpr std::uint32_t kRomSize = 640 * 1024;
inline constexpr Address kRamBase = 0x180000;
inline constexpr std::uint32_t kRamSize = 768 * 1024;

struct MemoryRegion {
  std::string name;
  Address base = 0;
  bool writable = false;
  Bytes bytes;

  std::uint64_t size() const { return bytes.size(); }
  std::uint64_t end() const { return std::uint64_t{base} + bytes.size(); }
  bool Contains(Address addr, std::uint64_t len) const {
    return addr >= base && std::uint64_t{addr} + len <= end() &&
           (len > 0 || addr < end());
  }

  bool operator==(const MemoryRegion&) const = default;
};

// Reads a binary blob into a region. Throws kIo if the file is unreadable.
MemoryRegion LoadRegion(const std::filesystem::path& path, std::string name,
                        Address base, bool writable);

class FirmwareImage {
 public:
  FirmwareImage() = default;

  // ROM at 0x0 (640 KiB, read-only) and RAM at 0x180000 (768 KiB), zeroed.
  static FirmwareImage DefaultLayout();

  // Throws kOverlap if the region intersects an existing one, kInvalidArgument
  // on a duplicate name.
  void AddRegion(MemoryRegion region);
  void LoadRegion(const std::filesystem::path& path, std::string name,
                  Address base, bool writable);

  // Replaces the bytes of an existing region; size must match.
  void ReplaceRegionBytes(std::string_view name, Bytes bytes);

  Bytes ReadBytes(Address addr, std::uint32_t len) const;
  std::uint32_t ReadWord(Address addr) const;
  std::uint16_t ReadHalf(Address addr) const;

  void WriteBytes(Address addr, std::span<const std::uint8_t> bytes);
  void WriteWord(Address addr, std::uint32_t value);

  void DumpRegion(std::string_view name,
                  const std::filesystem::path& path) const;

  const MemoryRegion* FindRegion(std::string_view name) const;
  // The region holding [addr, addr+len), or nullptr.
  const MemoryRegion* RegionFor(Address addr, std::uint64_t len = 1) const;
  bool IsMapped(Address addr, std::uint64_t len = 1) const {
    return RegionFor(addr, len) != nullptr;
  }
  bool IsWritable(Address addr, std::uint64_t len = 1) const;

  const std::vector<MemoryRegion>& regions() const { return regions_; }

  bool operator==(const FirmwareImage&) const = default;

 private:
  const MemoryRegion& CheckedRegion(Address addr, std::uint64_t len) const;

  std::vector<MemoryRegion> regions_;
};

// dhdutil-like hexdump: address, 16 bytes per line, ASCII gutter.
std::string HexDump(std::span<const std::uint8_t> bytes, Address base);

}  // namespace fwhook

#endif  // FWHOOK_FIRMWARE_IMAGE_HPP_

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

#include "fwhook/firmware_image.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "fwhook/error.hpp"

namespace fwhook {

namespace {

std::string RangeText(Address addr, std::uint64_t len) {
  const std::uint64_t end = std::uint64_t{addr} + len;
  return "[" + Hex32(addr) + ", " +
         (end > 0xFFFFFFFFull ? Hex(end) : Hex32(static_cast<Address>(end))) + ")";
}

}  // namespace

MemoryRegion LoadRegion(const std::filesystem::path& path, std::string name,
                        Address base, bool writable) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  MemoryRegion region;
  region.name = std::move(name);
  region.base = base;
  region.writable = writable;
  region.bytes.assign(std::istreambuf_iterator<char>(in),
                      std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw Error(ErrorCode::kIo, "read failed: " + path.string());
  }
  if (std::uint64_t{base} + region.bytes.size() > 0x100000000ull) {
    throw Error(ErrorCode::kRange,
                "region " + region.name + " extends past 4 GiB");
  }
  return region;
}

FirmwareImage FirmwareImage::DefaultLayout() {
  FirmwareImage image;
  image.AddRegion({"rom", kRomBase, false, Bytes(kRomSize, 0)});
  image.AddRegion({"ram", kRamBase, true, Bytes(kRamSize, 0)});
  return image;
}

void FirmwareImage::AddRegion(MemoryRegion region) {
  for (const auto& r : regions_) {
    if (r.name == region.name) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate region name " + region.name);
    }
    if (region.size() > 0 && r.size() > 0 && region.base < r.end() &&
        r.base < region.end()) {
      throw Error(ErrorCode::kOverlap,
                  "region " + region.name + " " +
                      RangeText(region.base, region.size()) + " overlaps " +
                      r.name + " " + RangeText(r.base, r.size()));
    }
  }
  auto pos = std::upper_bound(
      regions_.begin(), regions_.end(), region.base,
      [](Address a, const MemoryRegion& r) { return a < r.base; });
  regions_.insert(pos, std::move(region));
}

void FirmwareImage::LoadRegion(const std::filesystem::path& path,
                               std::string name, Address base, bool writable) {
  AddRegion(fwhook::LoadRegion(path, std::move(name), base, writable));
}

void FirmwareImage::ReplaceRegionBytes(std::string_view name, Bytes bytes) {
  for (auto& r : regions_) {
    if (r.name == name) {
      if (bytes.size() != r.bytes.size()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "size mismatch replacing region " + r.name);
      }
      r.bytes = std::move(bytes);
      return;
    }
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown region " + std::string(name));
}

const MemoryRegion* FirmwareImage::RegionFor(Address addr,
                                             std::uint64_t len) const {
  for (const auto& r : regions_) {
    if (r.Contains(addr, len)) return &r;
  }
  return nullptr;
}

bool FirmwareImage::IsWritable(Address addr, std::uint64_t len) const {
  const MemoryRegion* r = RegionFor(addr, len);
  return r != nullptr && r->writable;
}

const MemoryRegion* FirmwareImage::FindRegion(std::string_view name) const {
  for (const auto& r : regions_) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

const MemoryRegion& FirmwareImage::CheckedRegion(Address addr,
                                                 std::uint64_t len) const {
  const MemoryRegion* r = RegionFor(addr, len);
  if (r == nullptr) {
    throw Error(ErrorCode::kRange,
                "range " + RangeText(addr, len) +
                    " is not inside a single mapped region");
  }
  return *r;
}

Bytes FirmwareImage::ReadBytes(Address addr, std::uint32_t len) const {
  if (len == 0) {
    // A zero-length read is still anchored to a mapped address.
    CheckedRegion(addr, 0);
    return {};
  }
  const MemoryRegion& r = CheckedRegion(addr, len);
  auto first = r.bytes.begin() + (addr - r.base);
  return Bytes(first, first + len);
}

std::uint32_t FirmwareImage::ReadWord(Address addr) const {
  Bytes b = ReadBytes(addr, 4);
  return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 |
         std::uint32_t{b[2]} << 16 | std::uint32_t{b[3]} << 24;
}

std::uint16_t FirmwareImage::ReadHalf(Address addr) const {
  Bytes b = ReadBytes(addr, 2);
  return static_cast<std::uint16_t>(b[0] | b[1] << 8);
}

void FirmwareImage::WriteBytes(Address addr,
                               std::span<const std::uint8_t> bytes) {
  std::size_t index = static_cast<std::size_t>(
      &CheckedRegion(addr, bytes.size()) - regions_.data());
  MemoryRegion& r = regions_[index];
  if (!r.writable) {
    throw Error(ErrorCode::kWriteProtect,
                "write to read-only region " + r.name + " at " +
                    RangeText(addr, bytes.size()));
  }
  std::copy(bytes.begin(), bytes.end(), r.bytes.begin() + (addr - r.base));
}

void FirmwareImage::WriteWord(Address addr, std::uint32_t value) {
  const std::uint8_t b[4] = {
      static_cast<std::uint8_t>(value), static_cast<std::uint8_t>(value >> 8),
      static_cast<std::uint8_t>(value >> 16),
      static_cast<std::uint8_t>(value >> 24)};
  WriteBytes(addr, b);
}

void FirmwareImage::DumpRegion(std::string_view name,
                               const std::filesystem::path& path) const {
  const MemoryRegion* r = FindRegion(name);
  if (r == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown region " + std::string(name));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char*>(r->bytes.data()),
            static_cast<std::streamsize>(r->bytes.size()));
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed: " + path.string());
  }
}

std::string HexDump(std::span<const std::uint8_t> bytes, Address base) {
  std::string out;
  char buf[16];
  for (std::size_t line = 0; line < bytes.size(); line += 16) {
    std::snprintf(buf, sizeof(buf), "%08X ",
                  static_cast<unsigned>(base + line));
    out += buf;
    std::size_t n = std::min<std::size_t>(16, bytes.size() - line);
    for (std::size_t i = 0; i < 16; ++i) {
      if (i < n) {
        std::snprintf(buf, sizeof(buf), " %02x", bytes[line + i]);
        out += buf;
      } else {
        out += "   ";
      }
    }
    out += "  |";
    for (std::size_t i = 0; i < n; ++i) {
      std::uint8_t c = bytes[line + i];
      out += (c >= 0x20 && c < 0x7f) ? static_cast<char>(c) : '.';
    }
    out += "|\n";
  }
  return out;
}

}  // namespace fwhook

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

// 802.11 frames as the simulator sees them: addressing, type/subtype and
// body. Serialization covers the MAC header and body only; the FCS is
// represented by a flag.

#ifndef FWHOOK_DOT11_HPP_
#define FWHOOK_DOT11_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "fwhook/firmware_image.hpp"

namespace fwhook {

using MacAddr = std::array<std::uint8_t, 6>;

inline constexpr MacAddr kBroadcastMac = {0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF};

// Throws kParse unless `text` is six colon-separated hex octets.
MacAddr ParseMac(std::string_view text);
std::string FormatMac(const MacAddr& mac);
inline bool IsGroupAddress(const MacAddr& mac) { return (mac[0] & 1) != 0; }

enum class FrameType : std::uint8_t { kManagement = 0, kControl = 1, kData = 2 };

enum class Subtype : std::uint8_t {
  kAssocRequest,
  kProbeRequest,
  kProbeResponse,
  kBeacon,
  kRts,
  kCts,
  kAck,
  kData,
  kQosData,
};

FrameType TypeOf(Subtype subtype);
const char* SubtypeName(Subtype subtype);

struct Dot11Frame {
  Subtype subtype = Subtype::kData;
  MacAddr addr1{};
  MacAddr addr2{};  // unused by CTS/ACK
  MacAddr addr3{};  // unused by control frames
  std::uint16_t seq = 0;
  Bytes body;
  bool fcs_ok = true;
  std::uint8_t channel = 6;

  FrameType type() const { return TypeOf(subtype); }
  // Simplified: always addr3.
  const MacAddr& bssid() const { return addr3; }

  bool operator==(const Dot11Frame&) const = default;
};

// MAC header + body. ToDS/FromDS are left clear, so there is never an addr4.
Bytes SerializeDot11(const Dot11Frame& frame);

// Inverse of SerializeDot11. fcs_ok and channel come from out-of-band
// metadata (radiotap or the receive descriptor). Throws kParse.
Dot11Frame ParseDot11(std::span<const std::uint8_t> bytes, bool fcs_ok = true,
                      std::uint8_t channel = 6);

// Ethernet II re-framing of a data frame: dst = addr1, src = addr3. An
// RFC 1042 LLC/SNAP header is folded into the ethertype; other bodies get an
// 802.3 length field.
Bytes Dot11ToEthernet(const Dot11Frame& frame);

}  // namespace fwhook

#endif  // FWHOOK_DOT11_HPP_

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

#include "fwhook/dot11.hpp"

#include <cstdio>

#include "fwhook/error.hpp"

namespace fwhook {

MacAddr ParseMac(std::string_view text) {
  MacAddr mac{};
  unsigned v[6];
  char tail;
  std::string s(text);
  if (s.size() != 17 ||
      std::sscanf(s.c_str(), "%2x:%2x:%2x:%2x:%2x:%2x%c", &v[0], &v[1], &v[2],
                  &v[3], &v[4], &v[5], &tail) != 6) {
    throw Error(ErrorCode::kParse, "bad MAC address '" + s + "'");
  }
  for (int i = 0; i < 6; ++i) mac[i] = static_cast<std::uint8_t>(v[i]);
  return mac;
}

std::string FormatMac(const MacAddr& mac) {
  char buf[18];
  std::snprintf(buf, sizeof(buf), "%02x:%02x:%02x:%02x:%02x:%02x", mac[0], mac[1],
                mac[2], mac[3], mac[4], mac[5]);
  return buf;
}

namespace {

struct SubtypeInfo {
  Subtype subtype;
  FrameType type;
  std::uint8_t code;
  const char* name;
};

constexpr SubtypeInfo kSubtypes[] = {
    {Subtype::kAssocRequest, FrameType::kManagement, 0, "assoc-request"},
    {Subtype::kProbeRequest, FrameType::kManagement, 4, "probe-request"},
    {Subtype::kProbeResponse, FrameType::kManagement, 5, "probe-response"},
    {Subtype::kBeacon, FrameType::kManagement, 8, "beacon"},
    {Subtype::kRts, FrameType::kControl, 11, "rts"},
    {Subtype::kCts, FrameType::kControl, 12, "cts"},
    {Subtype::kAck, FrameType::kControl, 13, "ack"},
    {Subtype::kData, FrameType::kData, 0, "data"},
    {Subtype::kQosData, FrameType::kData, 8, "qos-data"},
};

const SubtypeInfo& Info(Subtype s) {
  for (const auto& i : kSubtypes) {
    if (i.subtype == s) return i;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown 802.11 subtype");
}

void PutMac(Bytes& out, const MacAddr& mac) { out.insert(out.end(), mac.begin(), mac.end()); }

MacAddr GetMac(std::span<const std::uint8_t> b, std::size_t at) {
  MacAddr mac;
  std::copy_n(b.begin() + static_cast<std::ptrdiff_t>(at), 6, mac.begin());
  return mac;
}

constexpr std::uint8_t kSnap[] = {0xAA, 0xAA, 0x03, 0x00, 0x00, 0x00};

}  // namespace

FrameType TypeOf(Subtype subtype) { return Info(subtype).type; }
const char* SubtypeName(Subtype subtype) { return Info(subtype).name; }

Bytes SerializeDot11(const Dot11Frame& f) {
  const auto& info = Info(f.subtype);
  Bytes out;
  out.reserve(32 + f.body.size());
  out.push_back(static_cast<std::uint8_t>(info.code << 4 |
                                          static_cast<int>(info.type) << 2));
  out.push_back(0);  // flags
  out.push_back(0);  // duration
  out.push_back(0);
  PutMac(out, f.addr1);
  if (info.type == FrameType::kControl) {
    if (f.subtype == Subtype::kRts) PutMac(out, f.addr2);
    return out;
  }
  PutMac(out, f.addr2);
  PutMac(out, f.addr3);
  out.push_back(static_cast<std::uint8_t>(f.seq << 4));
  out.push_back(static_cast<std::uint8_t>(f.seq >> 4));
  if (f.subtype == Subtype::kQosData) {
    out.push_back(0);
    out.push_back(0);
  }
  out.insert(out.end(), f.body.begin(), f.body.end());
  return out;
}

Dot11Frame ParseDot11(std::span<const std::uint8_t> b, bool fcs_ok,
                      std::uint8_t channel) {
  auto fail = [](const std::string& why) -> Dot11Frame {
    throw Error(ErrorCode::kParse, "802.11: " + why);
  };
  if (b.size() < 10) return fail("truncated frame control/addr1");
  if ((b[0] & 3) != 0) return fail("protocol version is not 0");
  const auto type = static_cast<FrameType>((b[0] >> 2) & 3);
  const std::uint8_t code = b[0] >> 4;
  const SubtypeInfo* info = nullptr;
  for (const auto& i : kSubtypes) {
    if (i.type == type && i.code == code) info = &i;
  }
  if (info == nullptr) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "unsupported type %d subtype %d",
                  static_cast<int>(type), code);
    return fail(buf);
  }
  if ((b[1] & 3) == 3) return fail("four-address frames are not supported");

  Dot11Frame f;
  f.subtype = info->subtype;
  f.fcs_ok = fcs_ok;
  f.channel = channel;
  f.addr1 = GetMac(b, 4);
  if (type == FrameType::kControl) {
    const std::size_t want = f.subtype == Subtype::kRts ? 16 : 10;
    if (b.size() != want) return fail(std::string(info->name) + " has the wrong length");
    if (f.subtype == Subtype::kRts) f.addr2 = GetMac(b, 10);
    return f;
  }
  std::size_t hdr = f.subtype == Subtype::kQosData ? 26 : 24;
  if (b.size() < hdr) return fail("truncated MAC header");
  f.addr2 = GetMac(b, 10);
  f.addr3 = GetMac(b, 16);
  f.seq = static_cast<std::uint16_t>((b[22] >> 4) | (b[23] << 4));
  f.body.assign(b.begin() + static_cast<std::ptrdiff_t>(hdr), b.end());
  return f;
}

Bytes Dot11ToEthernet(const Dot11Frame& f) {
  if (f.type() != FrameType::kData) {
    throw Error(ErrorCode::kInvalidArgument, "only data frames map to Ethernet");
  }
  Bytes out;
  PutMac(out, f.addr1);
  PutMac(out, f.addr3);
  const bool snap = f.body.size() >= 8 &&
                    std::equal(std::begin(kSnap), std::end(kSnap), f.body.begin());
  if (snap) {
    out.insert(out.end(), f.body.begin() + 6, f.body.end());
  } else {
    out.push_back(static_cast<std::uint8_t>(f.body.size() >> 8));
    out.push_back(static_cast<std::uint8_t>(f.body.size()));
    out.insert(out.end(), f.body.begin(), f.body.end());
  }
  return out;
}

}  // namespace fwhook

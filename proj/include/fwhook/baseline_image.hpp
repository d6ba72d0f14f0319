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

// The modeled stock firmware: a zeroed ROM plus a RAM image holding the few
// routines the simulator executes as real Thumb code (wlc_coreinit and its
// maccontrol literal words, the wlc_bmac_recv prologue, and the receive-loop
// veneer that calls dma_rx).

#ifndef FWHOOK_BASELINE_IMAGE_HPP_
#define FWHOOK_BASELINE_IMAGE_HPP_

#include <cstdint>

#include "fwhook/firmware_image.hpp"

namespace fwhook {

class SymbolMap;

// MCTL_IHR_EN | MCTL_INFRA | MCTL_WAKE: what stock coreinit programs.
inline constexpr std::uint32_t kBaselineMctlWord = 0x04020400;

// Patch placement window left free in the baseline RAM image.
inline constexpr Address kDefaultPlacementBase = 0x180000;
inline constexpr Address kDefaultPlacementLimit = 0x180E00;

FirmwareImage BuildBaselineImage(const SymbolMap& syms);

// Offset of the BL dma_rx inside wlc_bmac_recv_rx_veneer.
inline constexpr std::uint32_t kRxVeneerCallSiteOffset = 2;

}  // namespace fwhook

#endif  // FWHOOK_BASELINE_IMAGE_HPP_

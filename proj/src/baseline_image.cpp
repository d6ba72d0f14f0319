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

#include "fwhook/baseline_image.hpp"

#include "fwhook/symbol_map.hpp"
#include "fwhook/thumb.hpp"

namespace fwhook {

namespace {

class CodeWriter {
 public:
  CodeWriter(FirmwareImage& image, Address at) : image_(image), pc_(at) {}

  void Emit(const thumb::Instr& in) {
    Bytes b = thumb::Encode(in);
    image_.WriteBytes(pc_, b);
    pc_ += static_cast<Address>(b.size());
  }
  void Bl(Address target) {
    image_.WriteBytes(pc_, thumb::EncodeBl(pc_, target));
    pc_ += 4;
  }
  void Bw(Address target) {
    image_.WriteBytes(pc_, thumb::EncodeBw(pc_, target));
    pc_ += 4;
  }
  // LDR Rt, [PC, #..] for a literal word at `literal`.
  void LdrFrom(int rt, Address literal) {
    Emit(thumb::LdrLiteral(
        rt, static_cast<std::int32_t>(literal - ((pc_ + 4) & ~Address{3}))));
  }
  Address pc() const { return pc_; }

 private:
  FirmwareImage& image_;
  Address pc_;
};

}  // namespace

FirmwareImage BuildBaselineImage(const SymbolMap& syms) {
  auto image = FirmwareImage::DefaultLayout();

  // wlc_coreinit: wlc_bmac_mctrl(wlc_hw, *mask_word, *value_word)
  const Address mask_word = syms.Require("coreinit_mctrl_mask_word");
  const Address value_word = syms.Require("coreinit_mctrl_value_word");
  image.WriteWord(mask_word, kBaselineMctlWord);
  image.WriteWord(value_word, kBaselineMctlWord);
  {
    CodeWriter w(image, syms.Require("wlc_coreinit"));
    w.Emit(thumb::Push(0x4010));
    w.LdrFrom(1, mask_word);
    w.LdrFrom(2, value_word);
    w.Bl(syms.Require("wlc_bmac_mctrl"));
    w.Emit(thumb::Pop(0x8010));
  }

  // wlc_bmac_recv(wlc_hw, fifo, bound, cnt) prologue; the rest of the stock
  // body is modeled natively by the simulator.
  {
    CodeWriter w(image, syms.Require("wlc_bmac_recv"));
    w.Emit(thumb::Push(0x40F0));
    w.Emit(thumb::MovsReg(4, 0));
    w.Emit(thumb::MovsReg(5, 1));
    w.Emit(thumb::MovsReg(6, 2));
    w.Emit(thumb::MovsReg(7, 3));
    w.Emit(thumb::Nop());
    w.Emit(thumb::Pop(0x80F0));
  }

  // Receive-loop veneer: return dma_rx(di). Its BL is the hook site.
  {
    CodeWriter w(image, syms.Require("wlc_bmac_recv_rx_veneer"));
    w.Emit(thumb::Push(0x4010));
    w.Bl(syms.Require("dma_rx"));
    w.Emit(thumb::Pop(0x8010));
  }

  // FIQ entry in RAM jumps to the common exception handler.
  if (auto fiq = syms.Lookup("fiq_ram_handler")) {
    if (auto common = syms.Lookup("common_exception_handler")) {
      CodeWriter w(image, fiq->address);
      w.Bw(common->address);
    }
  }
  if (auto ref = syms.Lookup("callback_ref")) {
    if (auto fn = syms.Lookup("callback_fn")) {
      image.WriteWord(ref->address, fn->address | 1);
    }
  }

  image.WriteWord(syms.Require("dpc_rx_count"), 0);
  return image;
}

}  // namespace fwhook

#!/usr/bin/env python3
# Independent reference for the Thumb encodings frozen into the C++ tests.
#
# Every instruction is built here straight from the ARMv7-M encoding tables and
# then decoded by capstone; the script aborts if the two disagree. Run it to
# regenerate the constants in tests/unit/test_thumb_codegen.cpp and
# tests/acceptance/acceptance.cpp:
#
#   pip install capstone && python3 tests/oracle/thumb_oracle.py
import struct
import sys

import capstone

md = capstone.Cs(capstone.CS_ARCH_ARM, capstone.CS_MODE_THUMB)


def branch32(pc, target, link):
    off = target - (pc + 4)
    if off % 2 or not (-(1 << 24) <= off < (1 << 24)):
        return None
    imm = off & 0x1FFFFFF
    s = (imm >> 24) & 1
    i1 = (imm >> 23) & 1
    i2 = (imm >> 22) & 1
    imm10 = (imm >> 12) & 0x3FF
    imm11 = (imm >> 1) & 0x7FF
    j1 = (~(i1 ^ s)) & 1
    j2 = (~(i2 ^ s)) & 1
    hw1 = 0xF000 | (s << 10) | imm10
    hw2 = (0xD000 if link else 0x9000) | (j1 << 13) | (j2 << 11) | imm11
    return struct.pack("<HH", hw1, hw2)


def check_branch(pc, target, link):
    b = branch32(pc, target, link)
    insns = list(md.disasm(b, pc))
    assert len(insns) == 1, insns
    want = "bl" if link else "b.w"
    assert insns[0].mnemonic == want, (insns[0].mnemonic, want)
    got = int(insns[0].op_str.lstrip("#"), 16)
    assert got == target, (hex(got), hex(target))
    return b


def hello_world_stub(base=0x180000):
    code = b""
    code += struct.pack("<H", 0xB510)              # push {r4, lr}
    code += struct.pack("<H", 0x0004)              # movs r4, r0
    ldr_pc = base + len(code)
    pool = 0x14
    imm8 = (base + pool - ((ldr_pc + 4) & ~3)) // 4
    code += struct.pack("<H", 0x4800 | imm8)       # ldr r0, [pc, #imm8*4]
    code += branch32(base + len(code), 0x126F0, True)
    code += struct.pack("<H", 0x0020)              # movs r0, r4
    code += branch32(base + len(code), 0x8C69C, True)
    code += struct.pack("<H", 0xBD10)              # pop {r4, pc}
    assert len(code) == 0x12
    blob = code + b"\x00\x00" + struct.pack("<I", base + 0x18) + b"hello world\x00"
    return blob


def main():
    cases = [
        ("BL", 0x180006, 0x126F0, True),
        ("BL", 0x18000C, 0x8C69C, True),
        ("BL", 0x180000, 0x180004, True),
        ("BL", 0x180000, 0x180004 + (1 << 24) - 2, True),
        ("BL", 0x1180000, 0x1180004 - (1 << 24), True),
        ("B.W", 0x4F7A4, 0x180000, False),
        ("B.W", 0x1AAD98, 0x180000, False),
        ("B.W", 0x1AAD98, 0x180024, False),
    ]
    for name, pc, target, link in cases:
        b = check_branch(pc, target, link)
        print(f"{name:4s} pc=0x{pc:08X} target=0x{target:08X} bytes={b.hex()}")

    assert branch32(0x180000, 0x180004 + (1 << 24), True) is None
    print("BL   pc=0x00180000 target=0x01180004 -> out of range")

    stub = hello_world_stub()
    print("hello_world_stub", stub.hex())
    for insn in md.disasm(stub[:0x12], 0x180000):
        print(f"  0x{insn.address:08X} {insn.mnemonic} {insn.op_str}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace attsim {

using Address = std::uint16_t;
using Word = std::uint16_t;

inline constexpr int kNumRegs = 8;
inline constexpr int kRegPc = 0;
inline constexpr int kRegSp = 1;

// 16-bit load/store ISA. Every instruction encodes to 2 or 4 bytes:
//   byte 0: opcode
//   byte 1: register operands (low nibble / high nibble)
//   bytes 2..3: 16-bit little-endian immediate, only on 4-byte forms
// Unused fields must be zero; decode rejects non-canonical encodings so
// that encode(decode(x)) == x for every valid x.
enum class Opcode : std::uint8_t {
  Nop = 0x00,
  Halt = 0x01,
  Movi = 0x02,  // MOVI rd, #imm
  Mov = 0x03,   // MOV rd, rs
  Ld = 0x04,    // LD rd, [rs+off]
  St = 0x05,    // ST [rs+off], rd
  Ldi = 0x06,   // LDI rd, [addr]
  Sti = 0x07,   // STI [addr], rd
  Add = 0x08,
  Sub = 0x09,
  And = 0x0A,
  Xor = 0x0B,
  Cmp = 0x0C,
  Jmp = 0x0D,
  Jz = 0x0E,
  Jnz = 0x0F,
  Jc = 0x10,
  Jmpr = 0x11,  // JMPR rd (indirect jump)
  Call = 0x12,
  Ret = 0x13,
  Push = 0x14,
  Pop = 0x15,
  In = 0x16,   // IN rd, port   (port = byte offset into periph region)
  Out = 0x17,  // OUT port, rd
};

inline constexpr std::uint8_t kMaxOpcode = 0x17;

struct Instruction {
  Opcode op = Opcode::Nop;
  std::uint8_t rd = 0;  // first register operand (value reg for St/Out)
  std::uint8_t rs = 0;  // second register operand (base reg for Ld/St)
  Word imm = 0;         // immediate / address / offset / port

  bool operator==(const Instruction&) const = default;
};

// Encoded size in bytes (2 or 4).
std::size_t isa_size(Opcode op);

// Fixed cycle cost.
std::uint32_t isa_cycles(Opcode op);

// Cycle cost of servicing an interrupt and of one DMA word transfer.
inline constexpr std::uint32_t kIrqServiceCycles = 6;
inline constexpr std::uint32_t kDmaWordCycles = 2;

const char* isa_mnemonic(Opcode op);

bool isa_is_control(Opcode op);      // JMP/Jcc/JMPR/CALL/RET
bool isa_is_cond_branch(Opcode op);  // JZ/JNZ/JC
bool isa_is_load(Opcode op);         // LD/LDI/IN
bool isa_is_store(Opcode op);        // ST/STI/OUT

// Decode at the start of `bytes`. Returns nullopt for any non-canonical or
// unknown encoding (including truncation).
std::optional<Instruction> isa_decode(std::span<const std::uint8_t> bytes);

void isa_encode(const Instruction& ins, std::vector<std::uint8_t>& out);
std::vector<std::uint8_t> isa_encode(const Instruction& ins);

}  // namespace attsim

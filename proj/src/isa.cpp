#include "attsim/isa.hpp"

namespace attsim {

namespace {

struct OpInfo {
  const char* name;
  std::uint8_t size;
  std::uint8_t cycles;
  // operand shape controls canonical encoding checks
  bool uses_rd;
  bool uses_rs;
  bool uses_imm;
};

constexpr OpInfo kOps[] = {
    /* Nop  */ {"NOP", 2, 1, false, false, false},
    /* Halt */ {"HALT", 2, 1, false, false, false},
    /* Movi */ {"MOVI", 4, 2, true, false, true},
    /* Mov  */ {"MOV", 2, 1, true, true, false},
    /* Ld   */ {"LD", 4, 3, true, true, true},
    /* St   */ {"ST", 4, 3, true, true, true},
    /* Ldi  */ {"LDI", 4, 3, true, false, true},
    /* Sti  */ {"STI", 4, 3, true, false, true},
    /* Add  */ {"ADD", 2, 1, true, true, false},
    /* Sub  */ {"SUB", 2, 1, true, true, false},
    /* And  */ {"AND", 2, 1, true, true, false},
    /* Xor  */ {"XOR", 2, 1, true, true, false},
    /* Cmp  */ {"CMP", 2, 1, true, true, false},
    /* Jmp  */ {"JMP", 4, 2, false, false, true},
    /* Jz   */ {"JZ", 4, 2, false, false, true},
    /* Jnz  */ {"JNZ", 4, 2, false, false, true},
    /* Jc   */ {"JC", 4, 2, false, false, true},
    /* Jmpr */ {"JMPR", 2, 2, true, false, false},
    /* Call */ {"CALL", 4, 4, false, false, true},
    /* Ret  */ {"RET", 2, 4, false, false, false},
    /* Push */ {"PUSH", 2, 2, true, false, false},
    /* Pop  */ {"POP", 2, 2, true, false, false},
    /* In   */ {"IN", 4, 3, true, false, true},
    /* Out  */ {"OUT", 4, 3, true, false, true},
};

const OpInfo& info(Opcode op) { return kOps[static_cast<std::uint8_t>(op)]; }

}  // namespace

std::size_t isa_size(Opcode op) { return info(op).size; }
std::uint32_t isa_cycles(Opcode op) { return info(op).cycles; }
const char* isa_mnemonic(Opcode op) { return info(op).name; }

bool isa_is_control(Opcode op) {
  switch (op) {
    case Opcode::Jmp:
    case Opcode::Jz:
    case Opcode::Jnz:
    case Opcode::Jc:
    case Opcode::Jmpr:
    case Opcode::Call:
    case Opcode::Ret:
      return true;
    default:
      return false;
  }
}

bool isa_is_cond_branch(Opcode op) {
  return op == Opcode::Jz || op == Opcode::Jnz || op == Opcode::Jc;
}

bool isa_is_load(Opcode op) {
  return op == Opcode::Ld || op == Opcode::Ldi || op == Opcode::In;
}

bool isa_is_store(Opcode op) {
  return op == Opcode::St || op == Opcode::Sti || op == Opcode::Out;
}

std::optional<Instruction> isa_decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2) return std::nullopt;
  if (bytes[0] > kMaxOpcode) return std::nullopt;
  const auto op = static_cast<Opcode>(bytes[0]);
  const OpInfo& oi = info(op);
  if (bytes.size() < oi.size) return std::nullopt;

  Instruction ins;
  ins.op = op;
  const std::uint8_t regs = bytes[1];
  ins.rd = regs & 0x0F;
  ins.rs = regs >> 4;
  if (oi.size == 4) {
    ins.imm = static_cast<Word>(bytes[2] | (bytes[3] << 8));
  }

  // Canonical-form checks: unused register fields must be zero and the PC
  // register is never a valid operand.
  if (!oi.uses_rd && ins.rd != 0) return std::nullopt;
  if (!oi.uses_rs && ins.rs != 0) return std::nullopt;
  if (oi.uses_rd && (ins.rd >= kNumRegs || ins.rd == kRegPc)) return std::nullopt;
  if (oi.uses_rs && (ins.rs >= kNumRegs || ins.rs == kRegPc)) return std::nullopt;
  return ins;
}

void isa_encode(const Instruction& ins, std::vector<std::uint8_t>& out) {
  const OpInfo& oi = info(ins.op);
  out.push_back(static_cast<std::uint8_t>(ins.op));
  out.push_back(static_cast<std::uint8_t>((ins.rd & 0x0F) | (ins.rs << 4)));
  if (oi.size == 4) {
    out.push_back(static_cast<std::uint8_t>(ins.imm & 0xFF));
    out.push_back(static_cast<std::uint8_t>(ins.imm >> 8));
  }
}

std::vector<std::uint8_t> isa_encode(const Instruction& ins) {
  std::vector<std::uint8_t> out;
  isa_encode(ins, out);
  return out;
}

}  // namespace attsim

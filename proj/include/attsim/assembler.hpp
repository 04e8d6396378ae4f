#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "attsim/isa.hpp"
#include "attsim/memmap.hpp"

namespace attsim {

// Assembly text: one statement per line, `label:` definitions, `;` comments,
// `.org addr`, `.word v`, `.byte v` data and a `.targets a, b` annotation
// that declares the legal destinations of the next indirect jump.

struct Operand {
  bool is_symbol = false;
  Word value = 0;
  std::string symbol;

  static Operand num(Word v) { return {false, v, {}}; }
  static Operand sym(std::string s) { return {true, 0, std::move(s)}; }
};

struct AsmStatement {
  enum class Kind { Instr, Word, Byte, Org, Targets };
  Kind kind = Kind::Instr;
  std::vector<std::string> labels;
  Opcode op = Opcode::Nop;
  std::uint8_t rd = 0;
  std::uint8_t rs = 0;
  Operand imm;  // instruction immediate / data value / org address
  std::vector<Operand> targets;
  int src_line = 0;
  int orig_index = -1;  // provenance tag used by instrumentation passes
  bool synthetic = false;
};

struct AsmProgram {
  std::vector<AsmStatement> stmts;
};

struct AssembledImage {
  Address base = 0;
  std::vector<std::uint8_t> bytes;
  std::map<std::string, Address> symbols;
  std::vector<Address> stmt_addr;  // parallel to program statements
  std::vector<std::pair<Address, Instruction>> listing;
  std::map<Address, std::vector<Address>> indirect_targets;
  std::map<int, Address> orig_to_addr;  // orig_index -> assembled address

  std::uint32_t end() const { return base + bytes.size(); }
};

AsmProgram parse_asm(const std::string& text);
AssembledImage assemble(const AsmProgram& prog, Address default_base = 0x1000);
AssembledImage assemble_text(const std::string& text,
                             Address default_base = 0x1000);
std::string emit_asm(const AsmProgram& prog);
std::string disassemble(std::span<const std::uint8_t> bytes, Address base);

}  // namespace attsim

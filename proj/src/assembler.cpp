#include "attsim/assembler.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace attsim {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return s;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw AsmError("line " + std::to_string(line) + ": " + msg);
}

bool is_ident(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_')
    return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_';
  });
}

std::optional<long> parse_num(const std::string& tok) {
  if (tok.empty()) return std::nullopt;
  std::size_t i = 0;
  bool neg = false;
  if (tok[i] == '-') {
    neg = true;
    ++i;
  }
  if (i >= tok.size()) return std::nullopt;
  long v = 0;
  if (tok.size() - i > 2 && tok[i] == '0' && (tok[i + 1] == 'x' || tok[i + 1] == 'X')) {
    for (std::size_t j = i + 2; j < tok.size(); ++j) {
      const char c = static_cast<char>(std::tolower(tok[j]));
      int d;
      if (c >= '0' && c <= '9')
        d = c - '0';
      else if (c >= 'a' && c <= 'f')
        d = c - 'a' + 10;
      else
        return std::nullopt;
      v = v * 16 + d;
    }
  } else {
    for (std::size_t j = i; j < tok.size(); ++j) {
      if (!std::isdigit(static_cast<unsigned char>(tok[j]))) return std::nullopt;
      v = v * 10 + (tok[j] - '0');
    }
  }
  return neg ? -v : v;
}

Operand parse_operand(const std::string& tok, int line) {
  if (auto n = parse_num(tok))
    return Operand::num(static_cast<Word>(*n & 0xFFFF));
  if (is_ident(tok)) return Operand::sym(tok);
  fail(line, "bad operand '" + tok + "'");
}

std::optional<int> parse_reg(const std::string& tok) {
  if (tok.size() != 2) return std::nullopt;
  if (tok[0] != 'R' && tok[0] != 'r') return std::nullopt;
  if (tok[1] < '0' || tok[1] > '7') return std::nullopt;
  return tok[1] - '0';
}

int need_reg(const std::string& tok, int line) {
  auto r = parse_reg(tok);
  if (!r) fail(line, "expected register, got '" + tok + "'");
  if (*r == kRegPc) fail(line, "R0 is the program counter");
  return *r;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  const std::string last = trim(cur);
  if (!last.empty() || !out.empty()) out.push_back(last);
  return out;
}

// "[R3+4]" / "[R3-4]" / "[R3]" -> (reg, offset); "[addr]" -> operand
struct MemRef {
  bool has_reg = false;
  int reg = 0;
  Operand disp;
};

MemRef parse_memref(const std::string& tok, int line) {
  if (tok.size() < 3 || tok.front() != '[' || tok.back() != ']')
    fail(line, "expected memory operand, got '" + tok + "'");
  const std::string inner = trim(tok.substr(1, tok.size() - 2));
  MemRef m;
  if (auto r = parse_reg(inner)) {
    if (*r == kRegPc) fail(line, "R0 is the program counter");
    m.has_reg = true;
    m.reg = *r;
    m.disp = Operand::num(0);
    return m;
  }
  const std::size_t plus = inner.find_first_of("+-", 1);
  if (plus != std::string::npos) {
    if (auto r = parse_reg(trim(inner.substr(0, plus)))) {
      if (*r == kRegPc) fail(line, "R0 is the program counter");
      m.has_reg = true;
      m.reg = *r;
      std::string off = trim(inner.substr(plus));
      if (off[0] == '+') off = trim(off.substr(1));
      m.disp = parse_operand(off, line);
      return m;
    }
  }
  m.has_reg = false;
  m.disp = parse_operand(inner, line);
  return m;
}

}  // namespace

AsmProgram parse_asm(const std::string& text) {
  AsmProgram prog;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  std::vector<std::string> pending_labels;

  while (std::getline(is, raw)) {
    ++line_no;
    std::string line = raw;
    if (auto c = line.find(';'); c != std::string::npos) line = line.substr(0, c);
    line = trim(line);

    // leading labels, possibly several on one line
    while (true) {
      const std::size_t colon = line.find(':');
      if (colon == std::string::npos) break;
      const std::string head = trim(line.substr(0, colon));
      if (!is_ident(head)) break;
      pending_labels.push_back(head);
      line = trim(line.substr(colon + 1));
    }
    if (line.empty()) continue;

    AsmStatement st;
    st.labels = std::move(pending_labels);
    pending_labels.clear();
    st.src_line = line_no;

    std::string mnem, rest;
    if (auto sp = line.find_first_of(" \t"); sp != std::string::npos) {
      mnem = upper(line.substr(0, sp));
      rest = trim(line.substr(sp));
    } else {
      mnem = upper(line);
    }
    const auto args = split_commas(rest);
    auto want = [&](std::size_t n) {
      if (args.size() != n ||
          (n > 0 && std::any_of(args.begin(), args.end(),
                                [](const std::string& a) { return a.empty(); })))
        fail(line_no, mnem + " expects " + std::to_string(n) + " operand(s)");
    };

    if (mnem == ".ORG") {
      want(1);
      st.kind = AsmStatement::Kind::Org;
      st.imm = parse_operand(args[0], line_no);
      if (st.imm.is_symbol) fail(line_no, ".org takes a numeric address");
    } else if (mnem == ".WORD") {
      want(1);
      st.kind = AsmStatement::Kind::Word;
      st.imm = parse_operand(args[0], line_no);
    } else if (mnem == ".BYTE") {
      want(1);
      st.kind = AsmStatement::Kind::Byte;
      st.imm = parse_operand(args[0], line_no);
      if (st.imm.is_symbol) fail(line_no, ".byte takes a numeric value");
    } else if (mnem == ".TARGETS") {
      if (args.empty()) fail(line_no, ".targets expects at least one label");
      st.kind = AsmStatement::Kind::Targets;
      for (const auto& a : args) st.targets.push_back(parse_operand(a, line_no));
    } else {
      st.kind = AsmStatement::Kind::Instr;
      if (mnem == "NOP") {
        want(0);
        st.op = Opcode::Nop;
      } else if (mnem == "HALT") {
        want(0);
        st.op = Opcode::Halt;
      } else if (mnem == "RET") {
        want(0);
        st.op = Opcode::Ret;
      } else if (mnem == "MOVI") {
        want(2);
        st.op = Opcode::Movi;
        st.rd = need_reg(args[0], line_no);
        std::string v = args[1];
        if (!v.empty() && v[0] == '#') v = trim(v.substr(1));
        st.imm = parse_operand(v, line_no);
      } else if (mnem == "MOV" || mnem == "ADD" || mnem == "SUB" ||
                 mnem == "AND" || mnem == "XOR" || mnem == "CMP") {
        want(2);
        st.op = mnem == "MOV"   ? Opcode::Mov
                : mnem == "ADD" ? Opcode::Add
                : mnem == "SUB" ? Opcode::Sub
                : mnem == "AND" ? Opcode::And
                : mnem == "XOR" ? Opcode::Xor
                                : Opcode::Cmp;
        st.rd = need_reg(args[0], line_no);
        st.rs = need_reg(args[1], line_no);
      } else if (mnem == "LD" || mnem == "LDI") {
        want(2);
        st.rd = need_reg(args[0], line_no);
        const MemRef m = parse_memref(args[1], line_no);
        if (m.has_reg) {
          st.op = Opcode::Ld;
          st.rs = static_cast<std::uint8_t>(m.reg);
        } else {
          st.op = Opcode::Ldi;
        }
        st.imm = m.disp;
      } else if (mnem == "ST" || mnem == "STI") {
        want(2);
        st.rd = need_reg(args[1], line_no);
        const MemRef m = parse_memref(args[0], line_no);
        if (m.has_reg) {
          st.op = Opcode::St;
          st.rs = static_cast<std::uint8_t>(m.reg);
        } else {
          st.op = Opcode::Sti;
        }
        st.imm = m.disp;
      } else if (mnem == "JMP" || mnem == "JZ" || mnem == "JNZ" ||
                 mnem == "JC" || mnem == "CALL") {
        want(1);
        st.op = mnem == "JMP"  ? Opcode::Jmp
                : mnem == "JZ" ? Opcode::Jz
                : mnem == "JNZ" ? Opcode::Jnz
                : mnem == "JC"  ? Opcode::Jc
                                : Opcode::Call;
        st.imm = parse_operand(args[0], line_no);
      } else if (mnem == "JMPR") {
        want(1);
        st.op = Opcode::Jmpr;
        st.rd = need_reg(args[0], line_no);
      } else if (mnem == "PUSH" || mnem == "POP") {
        want(1);
        st.op = mnem == "PUSH" ? Opcode::Push : Opcode::Pop;
        st.rd = need_reg(args[0], line_no);
      } else if (mnem == "IN") {
        want(2);
        st.op = Opcode::In;
        st.rd = need_reg(args[0], line_no);
        st.imm = parse_operand(args[1], line_no);
      } else if (mnem == "OUT") {
        want(2);
        st.op = Opcode::Out;
        st.rd = need_reg(args[1], line_no);
        st.imm = parse_operand(args[0], line_no);
      } else {
        fail(line_no, "unknown mnemonic '" + mnem + "'");
      }
    }
    prog.stmts.push_back(std::move(st));
  }
  if (!pending_labels.empty()) {
    AsmStatement st;
    st.kind = AsmStatement::Kind::Instr;
    st.op = Opcode::Nop;
    st.labels = std::move(pending_labels);
    st.src_line = line_no;
    prog.stmts.push_back(std::move(st));
  }
  return prog;
}

AssembledImage assemble(const AsmProgram& prog, Address default_base) {
  AssembledImage img;
  img.base = default_base;

  // pass 1: layout
  bool base_set = false;
  std::uint32_t loc = default_base;
  std::vector<std::uint32_t> addrs(prog.stmts.size(), 0);
  for (std::size_t i = 0; i < prog.stmts.size(); ++i) {
    const AsmStatement& st = prog.stmts[i];
    if (st.kind == AsmStatement::Kind::Org) {
      if (base_set || loc != img.base || !img.symbols.empty() ||
          !st.labels.empty())
        fail(st.src_line, ".org must precede all code");
      img.base = st.imm.value;
      loc = img.base;
      base_set = true;
      addrs[i] = loc;
      continue;
    }
    addrs[i] = loc;
    for (const auto& l : st.labels) {
      if (img.symbols.count(l)) fail(st.src_line, "duplicate label '" + l + "'");
      img.symbols[l] = static_cast<Address>(loc);
    }
    switch (st.kind) {
      case AsmStatement::Kind::Instr:
        loc += isa_size(st.op);
        break;
      case AsmStatement::Kind::Word:
        loc += 2;
        break;
      case AsmStatement::Kind::Byte:
        loc += 1;
        break;
      default:
        break;
    }
    if (loc > 0x10000) fail(st.src_line, "program exceeds the address space");
  }

  // pass 2: encode
  auto resolve = [&](const Operand& o, int line) -> Word {
    if (!o.is_symbol) return o.value;
    auto it = img.symbols.find(o.symbol);
    if (it == img.symbols.end())
      fail(line, "unresolved target '" + o.symbol + "'");
    return it->second;
  };

  img.stmt_addr.resize(prog.stmts.size());
  std::vector<Address> pending_targets;
  bool have_targets = false;
  for (std::size_t i = 0; i < prog.stmts.size(); ++i) {
    const AsmStatement& st = prog.stmts[i];
    img.stmt_addr[i] = static_cast<Address>(addrs[i]);
    switch (st.kind) {
      case AsmStatement::Kind::Org:
        break;
      case AsmStatement::Kind::Targets: {
        pending_targets.clear();
        for (const auto& t : st.targets)
          pending_targets.push_back(resolve(t, st.src_line));
        have_targets = true;
        break;
      }
      case AsmStatement::Kind::Word: {
        const Word v = resolve(st.imm, st.src_line);
        img.bytes.push_back(static_cast<std::uint8_t>(v & 0xFF));
        img.bytes.push_back(static_cast<std::uint8_t>(v >> 8));
        break;
      }
      case AsmStatement::Kind::Byte:
        img.bytes.push_back(static_cast<std::uint8_t>(st.imm.value & 0xFF));
        break;
      case AsmStatement::Kind::Instr: {
        Instruction ins;
        ins.op = st.op;
        ins.rd = st.rd;
        ins.rs = st.rs;
        ins.imm = resolve(st.imm, st.src_line);
        isa_encode(ins, img.bytes);
        img.listing.push_back({static_cast<Address>(addrs[i]), ins});
        if (st.orig_index >= 0)
          img.orig_to_addr[st.orig_index] = static_cast<Address>(addrs[i]);
        if (st.op == Opcode::Jmpr) {
          if (have_targets) {
            img.indirect_targets[static_cast<Address>(addrs[i])] =
                pending_targets;
          }
          have_targets = false;
          pending_targets.clear();
        }
        break;
      }
    }
  }
  return img;
}

AssembledImage assemble_text(const std::string& text, Address default_base) {
  return assemble(parse_asm(text), default_base);
}

namespace {

std::string hex16(Word v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%04X", v);
  return buf;
}

std::string operand_str(const Operand& o) {
  return o.is_symbol ? o.symbol : hex16(o.value);
}

std::string instr_text(Opcode op, std::uint8_t rd, std::uint8_t rs,
                       const Operand& imm) {
  const std::string R = "R";
  auto reg = [&](std::uint8_t r) { return R + static_cast<char>('0' + r); };
  switch (op) {
    case Opcode::Nop:
    case Opcode::Halt:
    case Opcode::Ret:
      return isa_mnemonic(op);
    case Opcode::Movi:
      return std::string("MOVI ") + reg(rd) + ", #" + operand_str(imm);
    case Opcode::Mov:
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::And:
    case Opcode::Xor:
    case Opcode::Cmp:
      return std::string(isa_mnemonic(op)) + " " + reg(rd) + ", " + reg(rs);
    case Opcode::Ld:
      return "LD " + reg(rd) + ", [" + reg(rs) + "+" + operand_str(imm) + "]";
    case Opcode::St:
      return "ST [" + reg(rs) + "+" + operand_str(imm) + "], " + reg(rd);
    case Opcode::Ldi:
      return "LDI " + reg(rd) + ", [" + operand_str(imm) + "]";
    case Opcode::Sti:
      return "STI [" + operand_str(imm) + "], " + reg(rd);
    case Opcode::Jmp:
    case Opcode::Jz:
    case Opcode::Jnz:
    case Opcode::Jc:
    case Opcode::Call:
      return std::string(isa_mnemonic(op)) + " " + operand_str(imm);
    case Opcode::Jmpr:
      return "JMPR " + reg(rd);
    case Opcode::Push:
    case Opcode::Pop:
      return std::string(isa_mnemonic(op)) + " " + reg(rd);
    case Opcode::In:
      return "IN " + reg(rd) + ", " + operand_str(imm);
    case Opcode::Out:
      return "OUT " + operand_str(imm) + ", " + reg(rd);
  }
  return "?";
}

}  // namespace

std::string emit_asm(const AsmProgram& prog) {
  std::ostringstream os;
  for (const auto& st : prog.stmts) {
    for (const auto& l : st.labels) os << l << ":\n";
    switch (st.kind) {
      case AsmStatement::Kind::Org:
        os << ".org " << operand_str(st.imm) << "\n";
        break;
      case AsmStatement::Kind::Word:
        os << "    .word " << operand_str(st.imm) << "\n";
        break;
      case AsmStatement::Kind::Byte:
        os << "    .byte " << operand_str(st.imm) << "\n";
        break;
      case AsmStatement::Kind::Targets: {
        os << "    .targets ";
        for (std::size_t i = 0; i < st.targets.size(); ++i) {
          if (i) os << ", ";
          os << operand_str(st.targets[i]);
        }
        os << "\n";
        break;
      }
      case AsmStatement::Kind::Instr:
        os << "    " << instr_text(st.op, st.rd, st.rs, st.imm) << "\n";
        break;
    }
  }
  return os.str();
}

std::string disassemble(std::span<const std::uint8_t> bytes, Address base) {
  std::ostringstream os;
  os << ".org " << hex16(base) << "\n";
  std::size_t i = 0;
  while (i < bytes.size()) {
    auto dec = isa_decode(bytes.subspan(i));
    if (dec) {
      os << "    " << instr_text(dec->op, dec->rd, dec->rs,
                                 Operand::num(dec->imm))
         << "\n";
      i += isa_size(dec->op);
    } else if (i + 1 < bytes.size()) {
      const Word v = static_cast<Word>(bytes[i] | (bytes[i + 1] << 8));
      os << "    .word " << hex16(v) << "\n";
      i += 2;
    } else {
      os << "    .byte " << hex16(bytes[i]) << "\n";
      i += 1;
    }
  }
  return os.str();
}

}  // namespace attsim

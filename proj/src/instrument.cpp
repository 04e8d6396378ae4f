#include "attsim/instrument.hpp"

#include <algorithm>

#include "attsim/machine.hpp"

namespace attsim {

LogLayout LogLayout::standard(const MemoryMap& map, bool ilog) {
  LogLayout l;
  l.out_base = static_cast<Address>(map.dmem.start + 0x800);
  l.out_len = 64;
  l.cf_cursor = static_cast<Address>(l.out_base + l.out_len);
  l.cf_base = static_cast<Address>(l.cf_cursor + 2);
  l.cf_capacity = 128;
  l.has_ilog = ilog;
  l.i_cursor = l.cf_end();
  l.i_base = static_cast<Address>(l.i_cursor + 2);
  l.i_capacity = 192;
  l.or_min = l.out_base;
  l.or_end = ilog ? l.i_end() : l.cf_end();
  return l;
}

namespace {

constexpr std::uint8_t kScratchPool[] = {7, 6, 5, 4, 3, 2};

std::vector<std::uint8_t> pick_scratch(std::size_t n,
                                       std::initializer_list<std::uint8_t> excl) {
  std::vector<std::uint8_t> out;
  for (std::uint8_t r : kScratchPool) {
    if (std::find(excl.begin(), excl.end(), r) != excl.end()) continue;
    out.push_back(r);
    if (out.size() == n) return out;
  }
  throw InstrumentError("scratch register pool exhausted");
}

class Emitter {
 public:
  explicit Emitter(AsmProgram& out) : out_(out) {}

  std::string fresh(const std::string& stem) {
    return "__" + stem + "_" + std::to_string(counter_++);
  }

  std::size_t ins(Opcode op, std::uint8_t rd, std::uint8_t rs, Operand imm,
                  std::vector<std::string> labels = {}) {
    AsmStatement st;
    st.kind = AsmStatement::Kind::Instr;
    st.op = op;
    st.rd = rd;
    st.rs = rs;
    st.imm = std::move(imm);
    st.labels = std::move(labels);
    st.synthetic = true;
    out_.stmts.push_back(std::move(st));
    return out_.stmts.size() - 1;
  }

  void label_next(const std::string& l) { pending_.push_back(l); }

  std::size_t push_stmt(AsmStatement st) {
    if (!pending_.empty()) {
      st.labels.insert(st.labels.begin(), pending_.begin(), pending_.end());
      pending_.clear();
    }
    out_.stmts.push_back(std::move(st));
    return out_.stmts.size() - 1;
  }

  std::size_t emit(Opcode op, std::uint8_t rd, std::uint8_t rs, Operand imm) {
    AsmStatement st;
    st.kind = AsmStatement::Kind::Instr;
    st.op = op;
    st.rd = rd;
    st.rs = rs;
    st.imm = std::move(imm);
    st.synthetic = true;
    return push_stmt(std::move(st));
  }

 private:
  AsmProgram& out_;
  std::vector<std::string> pending_;
  int counter_ = 0;
};

// Captures zero/carry into s_fl (0..3) without using the stack.
void emit_flag_save(Emitter& e, std::uint8_t s_fl, std::uint8_t s_tmp) {
  const std::string c1 = e.fresh("fc1");
  const std::string c0 = e.fresh("fc0");
  const std::string z0 = e.fresh("fz");
  e.emit(Opcode::Movi, s_fl, 0, Operand::num(0));
  e.emit(Opcode::Jc, 0, 0, Operand::sym(c1));
  e.emit(Opcode::Jmp, 0, 0, Operand::sym(c0));
  e.label_next(c1);
  e.emit(Opcode::Movi, s_fl, 0, Operand::num(1));
  e.label_next(c0);
  e.emit(Opcode::Jnz, 0, 0, Operand::sym(z0));
  e.emit(Opcode::Movi, s_tmp, 0, Operand::num(2));
  e.emit(Opcode::Add, s_fl, s_tmp, Operand::num(0));
  e.label_next(z0);
}

// Rebuilds zero/carry from s_fl; clobbers s_a and s_b.
void emit_flag_restore(Emitter& e, std::uint8_t s_fl, std::uint8_t s_a,
                       std::uint8_t s_b) {
  const std::string f1 = e.fresh("f1");
  const std::string f2 = e.fresh("f2");
  const std::string f3 = e.fresh("f3");
  const std::string fd = e.fresh("fd");
  e.emit(Opcode::Movi, s_a, 0, Operand::num(3));
  e.emit(Opcode::Cmp, s_fl, s_a, Operand::num(0));
  e.emit(Opcode::Jz, 0, 0, Operand::sym(f3));
  e.emit(Opcode::Movi, s_a, 0, Operand::num(2));
  e.emit(Opcode::Cmp, s_fl, s_a, Operand::num(0));
  e.emit(Opcode::Jz, 0, 0, Operand::sym(f2));
  e.emit(Opcode::Movi, s_a, 0, Operand::num(1));
  e.emit(Opcode::Cmp, s_fl, s_a, Operand::num(0));
  e.emit(Opcode::Jz, 0, 0, Operand::sym(f1));
  e.emit(Opcode::Movi, s_a, 0, Operand::num(2));
  e.emit(Opcode::Movi, s_b, 0, Operand::num(1));
  e.emit(Opcode::Cmp, s_a, s_b, Operand::num(0));  // z=0 c=0
  e.emit(Opcode::Jmp, 0, 0, Operand::sym(fd));
  e.label_next(f1);
  e.emit(Opcode::Movi, s_a, 0, Operand::num(1));
  e.emit(Opcode::Movi, s_b, 0, Operand::num(2));
  e.emit(Opcode::Cmp, s_a, s_b, Operand::num(0));  // z=0 c=1
  e.emit(Opcode::Jmp, 0, 0, Operand::sym(fd));
  e.label_next(f2);
  e.emit(Opcode::Cmp, s_a, s_a, Operand::num(0));  // z=1 c=0
  e.emit(Opcode::Jmp, 0, 0, Operand::sym(fd));
  e.label_next(f3);
  e.emit(Opcode::Movi, s_a, 0, Operand::num(0x8000));
  e.emit(Opcode::Add, s_a, s_a, Operand::num(0));  // z=1 c=1
  e.label_next(fd);
}

struct PassState {
  Emitter e;
  const LogLayout& layout;
  std::string abort_label = "__cfa_abort";
  std::vector<std::size_t> trace_mark_stmts;
};

// Appends a word to the CF log: cursor load, capacity guard, store, bump.
// `load_value` emits whatever puts the logged word into s_c.
template <typename F>
void emit_cf_append(PassState& ps, std::uint8_t s_b, std::uint8_t s_c,
                    F&& load_value) {
  Emitter& e = ps.e;
  const std::string ok = e.fresh("cfok");
  e.emit(Opcode::Ldi, s_b, 0, Operand::num(ps.layout.cf_cursor));
  e.emit(Opcode::Movi, s_c, 0, Operand::num(ps.layout.cf_end()));
  e.emit(Opcode::Cmp, s_b, s_c, Operand::num(0));
  e.emit(Opcode::Jc, 0, 0, Operand::sym(ok));
  e.emit(Opcode::Jmp, 0, 0, Operand::sym(ps.abort_label));
  e.label_next(ok);
  load_value(s_c);
  e.emit(Opcode::St, s_c, s_b, Operand::num(0));
  e.emit(Opcode::Movi, s_c, 0, Operand::num(2));
  e.emit(Opcode::Add, s_b, s_c, Operand::num(0));
  e.emit(Opcode::Sti, s_b, 0, Operand::num(ps.layout.cf_cursor));
}

void emit_pushes(Emitter& e, const std::vector<std::uint8_t>& regs) {
  for (auto r : regs) e.emit(Opcode::Push, r, 0, Operand::num(0));
}
void emit_pops(Emitter& e, const std::vector<std::uint8_t>& regs) {
  for (auto it = regs.rbegin(); it != regs.rend(); ++it)
    e.emit(Opcode::Pop, *it, 0, Operand::num(0));
}

bool control_op(Opcode op) { return isa_is_control(op); }

// The logging bracket around one control transfer. The first emitted
// statement carries the original statement's labels and provenance.
void expand_control(PassState& ps, const AsmStatement& orig) {
  Emitter& e = ps.e;
  const auto s = pick_scratch(
      3, orig.op == Opcode::Jmpr ? std::initializer_list<std::uint8_t>{orig.rd}
                                 : std::initializer_list<std::uint8_t>{});
  const std::uint8_t sF = s[0], sB = s[1], sC = s[2];

  AsmStatement first;
  first.kind = AsmStatement::Kind::Instr;
  first.op = Opcode::Push;
  first.rd = sF;
  first.labels = orig.labels;
  first.orig_index = orig.orig_index;
  first.synthetic = true;
  ps.e.push_stmt(std::move(first));
  emit_pushes(e, {sB, sC});
  emit_flag_save(e, sF, sC);

  if (isa_is_cond_branch(orig.op)) {
    // Branch first on the untouched flags; the taken path logs and jumps.
    const std::string taken = e.fresh("tk");
    const std::string next = e.fresh("nx");
    emit_flag_restore(e, sF, sB, sC);  // flags for the branch itself
    e.emit(orig.op, 0, 0, Operand::sym(taken));
    e.emit(Opcode::Jmp, 0, 0, Operand::sym(next));
    e.label_next(taken);
    emit_cf_append(ps, sB, sC, [&](std::uint8_t sc) {
      e.emit(Opcode::Movi, sc, 0, orig.imm);
    });
    emit_flag_restore(e, sF, sB, sC);
    {
      // the semantic transfer: restore scratch, then take the branch
      emit_pops(e, {sF, sB, sC});
      const std::size_t idx = e.emit(Opcode::Jmp, 0, 0, orig.imm);
      ps.trace_mark_stmts.push_back(idx);
    }
    e.label_next(next);  // flags are already live on the fall-through path
    emit_pops(e, {sF, sB, sC});
    return;
  }

  switch (orig.op) {
    case Opcode::Jmp:
    case Opcode::Call:
      emit_cf_append(ps, sB, sC, [&](std::uint8_t sc) {
        e.emit(Opcode::Movi, sc, 0, orig.imm);
      });
      break;
    case Opcode::Jmpr:
      emit_cf_append(ps, sB, sC, [&](std::uint8_t sc) {
        e.emit(Opcode::Mov, sc, orig.rd, Operand::num(0));
      });
      break;
    case Opcode::Ret:
      // Return address sits above the three scratch saves.
      emit_cf_append(ps, sB, sC, [&](std::uint8_t sc) {
        e.emit(Opcode::Ld, sc, kRegSp, Operand::num(6));
      });
      break;
    default:
      throw InstrumentError("not a control transfer");
  }
  emit_flag_restore(e, sF, sB, sC);
  emit_pops(e, {sF, sB, sC});

  AsmStatement sem = orig;
  sem.labels.clear();
  sem.orig_index = -1;
  sem.synthetic = false;  // keep the original instruction as-is
  const std::size_t idx = ps.e.push_stmt(std::move(sem));
  ps.trace_mark_stmts.push_back(idx);
}

// Range guard ahead of an indirect store: aborts when the effective address
// lands inside the protected log span.
void expand_store_guard(PassState& ps, const AsmStatement& orig) {
  Emitter& e = ps.e;
  const Range span = ps.layout.protected_span();
  const auto s = pick_scratch(3, {orig.rd, orig.rs});
  const std::uint8_t sF = s[0], sA = s[1], sC = s[2];

  AsmStatement first;
  first.kind = AsmStatement::Kind::Instr;
  first.op = Opcode::Push;
  first.rd = sF;
  first.labels = orig.labels;
  first.orig_index = orig.orig_index;
  first.synthetic = true;
  e.push_stmt(std::move(first));
  emit_pushes(e, {sA, sC});
  emit_flag_save(e, sF, sC);

  const bool sp_base = orig.rs == kRegSp;
  const Word off = orig.imm.is_symbol ? 0 : orig.imm.value;
  if (orig.imm.is_symbol)
    throw InstrumentError("indirect store with symbolic offset");
  e.emit(Opcode::Mov, sA, orig.rs, Operand::num(0));
  e.emit(Opcode::Movi, sC, 0,
         Operand::num(static_cast<Word>(off + (sp_base ? 6 : 0))));
  e.emit(Opcode::Add, sA, sC, Operand::num(0));
  const std::string ok = e.fresh("stok");
  e.emit(Opcode::Movi, sC, 0, Operand::num(span.start));
  e.emit(Opcode::Cmp, sA, sC, Operand::num(0));
  e.emit(Opcode::Jc, 0, 0, Operand::sym(ok));  // below the span
  e.emit(Opcode::Movi, sC, 0, Operand::num(static_cast<Word>(span.end())));
  e.emit(Opcode::Cmp, sA, sC, Operand::num(0));
  e.emit(Opcode::Jc, 0, 0, Operand::sym(ps.abort_label));  // inside
  e.label_next(ok);
  emit_flag_restore(e, sF, sA, sC);
  emit_pops(e, {sF, sA, sC});

  AsmStatement sem = orig;
  sem.labels.clear();
  sem.orig_index = -1;
  e.push_stmt(std::move(sem));
}

// (address, value) append for one non-local load; the original instruction
// runs inside the bracket so the logged value is exactly what it loaded.
void expand_input_log(PassState& ps, const AsmStatement& orig,
                      const MemoryMap& map, Address er_lo,
                      const std::string& er_hi_label) {
  Emitter& e = ps.e;
  const auto s = pick_scratch(4, {orig.rd, orig.rs});
  const std::uint8_t sF = s[0], sA = s[1], sB = s[2], sC = s[3];
  const bool is_in = orig.op == Opcode::In;
  const bool is_ld = orig.op == Opcode::Ld;

  if (is_ld && orig.rs == kRegSp) {
    // SP-relative loads are stack accesses by construction; copy untouched.
    e.push_stmt(orig);
    return;
  }
  if (orig.imm.is_symbol && is_ld)
    throw InstrumentError("indirect load with symbolic offset");

  AsmStatement first;
  if (is_in) {
    if (orig.imm.is_symbol)
      throw InstrumentError("port read with symbolic port");
    // value must come from the port read itself; bracket goes after it
    first = orig;
    first.synthetic = false;
    e.push_stmt(std::move(first));
    emit_pushes(e, {sF, sA, sB, sC});
    emit_flag_save(e, sF, sC);
    e.emit(Opcode::Movi, sA, 0,
           Operand::num(static_cast<Word>(map.periph.start + orig.imm.value)));
  } else {
    first.kind = AsmStatement::Kind::Instr;
    first.op = Opcode::Push;
    first.rd = sF;
    first.labels = orig.labels;
    first.orig_index = orig.orig_index;
    first.synthetic = true;
    e.push_stmt(std::move(first));
    emit_pushes(e, {sA, sB, sC});
    emit_flag_save(e, sF, sC);
    if (orig.op == Opcode::Ld) {
      e.emit(Opcode::Mov, sA, orig.rs, Operand::num(0));
      e.emit(Opcode::Movi, sC, 0, orig.imm);
      e.emit(Opcode::Add, sA, sC, Operand::num(0));
    } else {  // Ldi
      e.emit(Opcode::Movi, sA, 0, orig.imm);
    }
    e.emit(Opcode::Push, sA, 0, Operand::num(0));
    AsmStatement inner = orig;
    inner.labels.clear();
    inner.orig_index = -1;
    e.push_stmt(std::move(inner));
    e.emit(Opcode::Pop, sA, 0, Operand::num(0));
  }

  const std::string skip = e.fresh("iskip");
  const std::string nonlocal = e.fresh("inl");
  const std::string log = e.fresh("ilog");
  if (!is_in) {
    // local iff current SP <= ea <= stack base
    e.emit(Opcode::Cmp, sA, kRegSp, Operand::num(0));
    e.emit(Opcode::Jc, 0, 0, Operand::sym(nonlocal));
    e.emit(Opcode::Movi, sC, 0, Operand::num(map.stack_base));
    e.emit(Opcode::Cmp, sC, sA, Operand::num(0));
    e.emit(Opcode::Jc, 0, 0, Operand::sym(nonlocal));
    e.emit(Opcode::Jmp, 0, 0, Operand::sym(skip));
    e.label_next(nonlocal);
    // reads of the attested code region itself are not inputs
    e.emit(Opcode::Movi, sC, 0, Operand::num(er_lo));
    e.emit(Opcode::Cmp, sA, sC, Operand::num(0));
    e.emit(Opcode::Jc, 0, 0, Operand::sym(log));
    e.emit(Opcode::Movi, sC, 0, Operand::sym(er_hi_label));
    e.emit(Opcode::Cmp, sA, sC, Operand::num(0));
    e.emit(Opcode::Jc, 0, 0, Operand::sym(skip));
    e.label_next(log);
  }
  const std::string capok = e.fresh("icap");
  e.emit(Opcode::Ldi, sB, 0, Operand::num(ps.layout.i_cursor));
  e.emit(Opcode::Movi, sC, 0,
         Operand::num(static_cast<Word>(ps.layout.i_end() - 2)));
  e.emit(Opcode::Cmp, sB, sC, Operand::num(0));
  e.emit(Opcode::Jc, 0, 0, Operand::sym(capok));
  e.emit(Opcode::Jmp, 0, 0, Operand::sym(ps.abort_label));
  e.label_next(capok);
  e.emit(Opcode::St, sA, sB, Operand::num(0));
  e.emit(Opcode::Mov, sC, orig.rd, Operand::num(0));
  e.emit(Opcode::St, sC, sB, Operand::num(2));
  e.emit(Opcode::Movi, sC, 0, Operand::num(4));
  e.emit(Opcode::Add, sB, sC, Operand::num(0));
  e.emit(Opcode::Sti, sB, 0, Operand::num(ps.layout.i_cursor));
  e.label_next(skip);
  emit_flag_restore(e, sF, sB, sC);
  emit_pops(e, {sF, sA, sB, sC});
}

AsmProgram tag_orig(const AsmProgram& prog) {
  AsmProgram tagged = prog;
  for (std::size_t i = 0; i < tagged.stmts.size(); ++i)
    tagged.stmts[i].orig_index = static_cast<int>(i);
  return tagged;
}

InstrumentedProgram finish(AsmProgram out, const AsmProgram& tagged,
                           Address er_base, const LogLayout& layout,
                           std::vector<std::size_t> trace_stmts) {
  InstrumentedProgram ip;
  ip.layout = layout;
  ip.prog = std::move(out);
  ip.image = assemble(ip.prog, er_base);
  if (ip.image.end() > 0x3000)
    throw InstrumentError("instrumented code too large for ER");

  // late check: direct stores into the protected span
  const Range span = layout.protected_span();
  for (std::size_t i = 0; i < ip.prog.stmts.size(); ++i) {
    const auto& st = ip.prog.stmts[i];
    if (st.kind != AsmStatement::Kind::Instr || st.synthetic) continue;
    if (st.op != Opcode::Sti) continue;
    Word target = st.imm.is_symbol ? ip.image.symbols.at(st.imm.symbol)
                                   : st.imm.value;
    if (span.overlaps(target, 2))
      throw InstrumentError("direct store into the log span at line " +
                            std::to_string(st.src_line));
  }

  const AssembledImage orig_img = assemble(tagged, er_base);
  for (std::size_t i = 0; i < tagged.stmts.size(); ++i) {
    if (tagged.stmts[i].kind != AsmStatement::Kind::Instr) continue;
    auto it = ip.image.orig_to_addr.find(static_cast<int>(i));
    if (it == ip.image.orig_to_addr.end()) continue;
    const Address oa = orig_img.stmt_addr[i];
    const Address ia = it->second;
    ip.orig_to_instr[oa] = ia;
    ip.instr_to_orig[ia] = oa;
    if (tagged.stmts[i].op == Opcode::Call) {
      // pair up the return sites as well
      ip.orig_to_instr[static_cast<Address>(oa + 4)] =
          static_cast<Address>(ia + 4);
      ip.instr_to_orig[static_cast<Address>(ia + 4)] =
          static_cast<Address>(oa + 4);
    }
  }
  for (std::size_t idx : trace_stmts)
    ip.trace_marks.insert(ip.image.stmt_addr[idx]);

  ip.er_min = er_base;
  ip.er_max = ip.image.symbols.at("__er_last");
  ip.abort_pad = ip.image.symbols.at("__cfa_abort");
  return ip;
}

}  // namespace

InstrumentedProgram instrument_cfa(const AsmProgram& prog, Address er_base,
                                   const LogLayout& layout) {
  const AsmProgram tagged = tag_orig(prog);
  AsmProgram out;
  PassState ps{Emitter(out), layout, "__cfa_abort", {}};

  for (const auto& st : tagged.stmts) {
    if (st.kind == AsmStatement::Kind::Org) continue;
    if (st.kind != AsmStatement::Kind::Instr) {
      ps.e.push_stmt(st);
      continue;
    }
    if (control_op(st.op)) {
      expand_control(ps, st);
    } else if (st.op == Opcode::St) {
      expand_store_guard(ps, st);
    } else {
      ps.e.push_stmt(st);
    }
  }
  // trailer: last ER instruction, the abort landing pad, and a stop for
  // standalone runs
  {
    AsmStatement last;
    last.kind = AsmStatement::Kind::Instr;
    last.op = Opcode::Nop;
    last.labels = {"__er_last"};
    last.synthetic = true;
    ps.e.push_stmt(std::move(last));
    AsmStatement pad;
    pad.kind = AsmStatement::Kind::Instr;
    pad.op = Opcode::Nop;
    pad.labels = {"__cfa_abort"};
    pad.synthetic = true;
    ps.e.push_stmt(std::move(pad));
    AsmStatement hi;
    hi.kind = AsmStatement::Kind::Instr;
    hi.op = Opcode::Halt;
    hi.labels = {"__er_hi"};
    hi.synthetic = true;
    ps.e.push_stmt(std::move(hi));
  }
  return finish(std::move(out), tagged, er_base, layout,
                std::move(ps.trace_mark_stmts));
}

InstrumentedProgram instrument_dfa(const AsmProgram& prog, Address er_base,
                                   const LogLayout& layout) {
  if (!layout.has_ilog)
    throw InstrumentError("input logging needs an I-log in the layout");
  InstrumentedProgram cfa = instrument_cfa(prog, er_base, layout);

  AsmProgram out;
  PassState ps{Emitter(out), layout, "__cfa_abort", {}};
  const MemoryMap map = MemoryMap::standard();

  std::vector<std::size_t> remapped_marks;
  std::set<std::size_t> cfa_marks;  // statement indices in cfa.prog
  {
    // recover which cfa statements were trace marks by address
    std::map<Address, std::size_t> addr_to_stmt;
    for (std::size_t i = 0; i < cfa.prog.stmts.size(); ++i)
      addr_to_stmt[cfa.image.stmt_addr[i]] = i;
    for (Address a : cfa.trace_marks) cfa_marks.insert(addr_to_stmt.at(a));
  }

  for (std::size_t i = 0; i < cfa.prog.stmts.size(); ++i) {
    const AsmStatement& st = cfa.prog.stmts[i];
    const bool mark = cfa_marks.count(i) != 0;
    if (st.kind == AsmStatement::Kind::Instr && !st.synthetic &&
        isa_is_load(st.op)) {
      expand_input_log(ps, st, map, er_base, "__er_hi");
      if (mark) throw InstrumentError("load marked as transfer");
      continue;
    }
    const std::size_t idx = ps.e.push_stmt(st);
    if (mark) remapped_marks.push_back(idx);
  }
  auto ip = finish(std::move(out), tag_orig(prog), er_base, layout,
                   std::move(remapped_marks));
  return ip;
}

ProgramKnowledge make_knowledge(const std::string& er_text, Address er_base,
                                const LogLayout& layout, bool cfa, bool dfa) {
  ProgramKnowledge k;
  k.er_base = er_base;
  k.layout = layout;
  k.orig_prog = tag_orig(parse_asm(er_text));
  k.orig_img = assemble(k.orig_prog, er_base);
  k.orig_cfg = build_cfg(k.orig_img);
  if (dfa) {
    k.instr = instrument_dfa(k.orig_prog, er_base, layout);
    k.instrumented = true;
  } else if (cfa) {
    k.instr = instrument_cfa(k.orig_prog, er_base, layout);
    k.instrumented = true;
  }
  return k;
}

namespace {

struct RunOut {
  std::uint64_t cycles = 0;
  std::vector<Word> out_words;
  std::vector<std::uint8_t> or_area;
};

RunOut run_bare(const AssembledImage& img, const LogLayout& layout,
                const std::vector<Word>& inputs) {
  MachineConfig cfg;  // no monitors
  Machine m(cfg);
  std::vector<std::uint8_t> padded(img.base - cfg.map.pmem.start, 0);
  padded.insert(padded.end(), img.bytes.begin(), img.bytes.end());
  m.load(padded);
  m.poke_pc(img.base);
  const std::uint8_t cur[4] = {
      static_cast<std::uint8_t>(layout.cf_base & 0xFF),
      static_cast<std::uint8_t>(layout.cf_base >> 8),
      static_cast<std::uint8_t>(layout.i_base & 0xFF),
      static_cast<std::uint8_t>(layout.i_base >> 8)};
  m.host_write(layout.cf_cursor, std::span(cur, 2));
  m.host_write(layout.i_cursor, std::span(cur + 2, 2));
  m.feed_input(inputs);
  m.run(2'000'000);
  RunOut out;
  out.cycles = m.st.cycles;
  out.out_words = m.io.gpio_out;
  out.or_area = m.peek_range(layout.out_base, layout.out_len);
  return out;
}

AssembledImage wrap_standalone(const std::string& text, Address base) {
  AsmProgram p = parse_asm(text);
  AsmStatement nop;
  nop.kind = AsmStatement::Kind::Instr;
  nop.op = Opcode::Nop;
  nop.synthetic = true;
  p.stmts.push_back(nop);
  p.stmts.push_back(nop);
  AsmStatement halt = nop;
  halt.op = Opcode::Halt;
  p.stmts.push_back(halt);
  return assemble(p, base);
}

}  // namespace

OverheadRow measure_overhead(const std::string& name,
                             const std::string& orig_text,
                             const std::string& instr_text, Address base,
                             const LogLayout& layout,
                             const std::vector<std::vector<Word>>& inputs) {
  OverheadRow row;
  row.name = name;
  row.orig_bytes = assemble_text(orig_text, base).bytes.size();
  row.instr_bytes = assemble_text(instr_text, base).bytes.size();
  row.code_pct = row.orig_bytes == 0
                     ? 0.0
                     : 100.0 *
                           (static_cast<double>(row.instr_bytes) -
                            static_cast<double>(row.orig_bytes)) /
                           static_cast<double>(row.orig_bytes);

  const AssembledImage orig_img = wrap_standalone(orig_text, base);
  const AssembledImage instr_img = wrap_standalone(instr_text, base);
  for (const auto& vec : inputs) {
    const RunOut a = run_bare(orig_img, layout, vec);
    const RunOut b = run_bare(instr_img, layout, vec);
    row.orig_cycles += a.cycles;
    row.instr_cycles += b.cycles;
    if (a.out_words != b.out_words || a.or_area != b.or_area)
      row.outputs_match = false;
    ++row.runs;
  }
  row.runtime_pct = row.orig_cycles == 0
                        ? 0.0
                        : 100.0 *
                              (static_cast<double>(row.instr_cycles) -
                               static_cast<double>(row.orig_cycles)) /
                              static_cast<double>(row.orig_cycles);
  return row;
}

}  // namespace attsim

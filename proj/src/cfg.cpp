#include "attsim/cfg.hpp"

#include <algorithm>

namespace attsim {

const BasicBlock* Cfg::block_at(Address a) const {
  for (const auto& b : blocks)
    if (a >= b.start && a < b.end) return &b;
  return nullptr;
}

Cfg build_cfg(const AssembledImage& img) {
  Cfg cfg;
  cfg.indirect_targets = img.indirect_targets;
  for (const auto& [addr, ins] : img.listing) cfg.instrs[addr] = ins;

  std::set<Address> leaders;
  if (!img.listing.empty()) leaders.insert(img.listing.front().first);

  auto is_instr = [&](Address a) { return cfg.instrs.count(a) != 0; };

  for (const auto& [addr, ins] : img.listing) {
    const Address next = static_cast<Address>(addr + isa_size(ins.op));
    switch (ins.op) {
      case Opcode::Jmp:
        leaders.insert(ins.imm);
        if (is_instr(next)) leaders.insert(next);
        break;
      case Opcode::Jz:
      case Opcode::Jnz:
      case Opcode::Jc:
        leaders.insert(ins.imm);
        if (is_instr(next)) leaders.insert(next);
        break;
      case Opcode::Call:
        leaders.insert(ins.imm);
        if (is_instr(next)) leaders.insert(next);
        break;
      case Opcode::Jmpr: {
        auto it = img.indirect_targets.find(addr);
        if (it == img.indirect_targets.end())
          throw AsmError("indirect jump at " + std::to_string(addr) +
                         " lacks a .targets annotation");
        for (Address t : it->second) leaders.insert(t);
        if (is_instr(next)) leaders.insert(next);
        break;
      }
      case Opcode::Ret:
      case Opcode::Halt:
        if (is_instr(next)) leaders.insert(next);
        break;
      default:
        break;
    }
  }
  for (Address l : leaders)
    if (!is_instr(l)) throw AsmError("branch target is not an instruction");

  // form blocks
  for (auto it = leaders.begin(); it != leaders.end(); ++it) {
    BasicBlock b;
    b.start = *it;
    auto next_leader = std::next(it);
    std::uint32_t end = b.start;
    BlockTerm term = BlockTerm::FallThrough;
    for (auto ii = cfg.instrs.lower_bound(b.start); ii != cfg.instrs.end();
         ++ii) {
      const auto [addr, ins] = *ii;
      if (next_leader != leaders.end() && addr >= *next_leader) break;
      if (addr > end && end != b.start) break;  // hole in the stream
      end = addr + isa_size(ins.op);
      bool stop = true;
      switch (ins.op) {
        case Opcode::Jmp:
          term = BlockTerm::Jump;
          break;
        case Opcode::Jz:
        case Opcode::Jnz:
        case Opcode::Jc:
          term = BlockTerm::CondBranch;
          break;
        case Opcode::Call:
          term = BlockTerm::Call;
          break;
        case Opcode::Jmpr:
          term = BlockTerm::IndirectJump;
          break;
        case Opcode::Ret:
          term = BlockTerm::Return;
          break;
        case Opcode::Halt:
          term = BlockTerm::Halt;
          break;
        default:
          stop = false;
          break;
      }
      if (stop) break;
    }
    b.term = term;
    b.end = end;
    cfg.blocks.push_back(b);
  }

  // edges
  std::set<Address> call_fallthroughs;
  std::set<Address> callees;
  for (const auto& b : cfg.blocks) {
    // find terminator instruction: the last instruction of the block
    Address term_addr = b.start;
    Instruction term_ins{};
    for (auto ii = cfg.instrs.lower_bound(b.start);
         ii != cfg.instrs.end() && ii->first < b.end; ++ii) {
      term_addr = ii->first;
      term_ins = ii->second;
    }
    const Address next = static_cast<Address>(term_addr + isa_size(term_ins.op));
    switch (b.term) {
      case BlockTerm::Jump:
        cfg.edges.push_back({b.start, term_ins.imm, EdgeKind::Direct});
        break;
      case BlockTerm::CondBranch:
        cfg.edges.push_back({b.start, term_ins.imm, EdgeKind::CondTaken});
        if (cfg.instrs.count(next))
          cfg.edges.push_back({b.start, next, EdgeKind::CondFall});
        break;
      case BlockTerm::Call:
        cfg.edges.push_back({b.start, term_ins.imm, EdgeKind::Call});
        callees.insert(term_ins.imm);
        if (cfg.instrs.count(next)) call_fallthroughs.insert(next);
        break;
      case BlockTerm::IndirectJump:
        for (Address t : cfg.indirect_targets.at(term_addr))
          cfg.edges.push_back({b.start, t, EdgeKind::Indirect});
        break;
      case BlockTerm::Return:
      case BlockTerm::Halt:
        break;
      case BlockTerm::FallThrough:
        if (cfg.instrs.count(static_cast<Address>(b.end)))
          cfg.edges.push_back(
              {b.start, static_cast<Address>(b.end), EdgeKind::Fall});
        break;
    }
  }
  // Return edges are conservative: every RET may resume at any recorded call
  // fall-through. The walker does precise pairing with an abstract stack.
  for (const auto& b : cfg.blocks) {
    if (b.term != BlockTerm::Return) continue;
    for (Address ft : call_fallthroughs)
      cfg.edges.push_back({b.start, ft, EdgeKind::Return});
  }
  return cfg;
}

}  // namespace attsim

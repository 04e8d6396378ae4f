#pragma once

#include <map>
#include <set>
#include <vector>

#include "attsim/assembler.hpp"

namespace attsim {

enum class BlockTerm : std::uint8_t {
  FallThrough,
  Jump,
  CondBranch,
  Call,
  Return,
  IndirectJump,
  Halt,
};

struct BasicBlock {
  Address start = 0;
  std::uint32_t end = 0;  // exclusive byte bound
  BlockTerm term = BlockTerm::FallThrough;
};

enum class EdgeKind : std::uint8_t {
  Direct,
  CondTaken,
  CondFall,
  Call,
  Return,
  Indirect,
  Fall,
};

struct CfgEdge {
  Address from = 0;  // block start
  Address to = 0;    // block start
  EdgeKind kind = EdgeKind::Direct;
};

struct Cfg {
  std::vector<BasicBlock> blocks;
  std::vector<CfgEdge> edges;
  // instruction-level successor knowledge used by the log walker
  std::map<Address, Instruction> instrs;
  std::map<Address, std::vector<Address>> indirect_targets;

  const BasicBlock* block_at(Address a) const;
};

// Splits the assembled instruction stream into basic blocks and edges.
// Indirect jumps take their edge set from the `.targets` annotation; an
// unannotated indirect jump is rejected.
Cfg build_cfg(const AssembledImage& img);

}  // namespace attsim

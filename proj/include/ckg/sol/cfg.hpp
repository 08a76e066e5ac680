#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "ckg/sol/ast.hpp"

// Control-flow graph over the flattened statement list of one body. Blocks
// hold contiguous statement index ranges; branch and loop statements terminate
// their block. The entry block never has predecessors, so a loop whose header
// would coincide with the entry gets a fresh header block instead.

namespace ckg::sol {

enum class EdgeKind { Fallthrough, TrueBranch, FalseBranch, LoopBack };

inline const char* to_string(EdgeKind k) {
    switch (k) {
    case EdgeKind::Fallthrough: return "fallthrough";
    case EdgeKind::TrueBranch: return "true_branch";
    case EdgeKind::FalseBranch: return "false_branch";
    case EdgeKind::LoopBack: return "loop_back";
    }
    return "?";
}

struct CfgEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    EdgeKind kind = EdgeKind::Fallthrough;
    auto operator<=>(const CfgEdge&) const = default;
};

struct CfgBlock {
    std::size_t id = 0;
    StmtRange stmts{}; // contiguous indices into the flat statement list
    std::vector<std::size_t> succs;
    std::vector<std::size_t> preds;
};

struct Cfg {
    std::vector<CfgBlock> blocks; // blocks[0] is the entry
    std::vector<CfgEdge> edges;
    std::set<std::size_t> exits; // blocks with no successors

    static constexpr std::size_t kEntry = 0;
    const CfgBlock& entry() const { return blocks.front(); }
};

class CfgBuilder {
public:
    Cfg build(const std::vector<Statement>& stmts) {
        cfg_ = Cfg{};
        stmts_ = &stmts;
        std::size_t entry = new_block();
        lower_range(StmtRange{0, stmts.size()}, entry);
        for (const CfgEdge& e : cfg_.edges) {
            cfg_.blocks[e.from].succs.push_back(e.to);
            cfg_.blocks[e.to].preds.push_back(e.from);
        }
        for (const CfgBlock& b : cfg_.blocks)
            if (b.succs.empty()) cfg_.exits.insert(b.id);
        return std::move(cfg_);
    }

private:
    // Lowers [r.first, r.first+r.count) starting in block `cur`; returns the
    // block that control falls out of.
    std::size_t lower_range(StmtRange r, std::size_t cur) {
        std::size_t i = r.first;
        const std::size_t stop = r.past_end();
        while (i < stop) {
            const Statement& s = (*stmts_)[i];
            if (s.kind == StatementKind::If) {
                append_stmt(cur, i);
                std::size_t then_b = new_block();
                link(cur, then_b, EdgeKind::TrueBranch);
                std::size_t then_out = lower_range(s.then_range, then_b);
                if (s.has_else) {
                    std::size_t else_b = new_block();
                    link(cur, else_b, EdgeKind::FalseBranch);
                    std::size_t else_out = lower_range(s.else_range, else_b);
                    std::size_t join = new_block();
                    link(then_out, join, EdgeKind::Fallthrough);
                    link(else_out, join, EdgeKind::Fallthrough);
                    i = s.else_range.past_end();
                    cur = join;
                } else {
                    std::size_t join = new_block();
                    link(then_out, join, EdgeKind::Fallthrough);
                    link(cur, join, EdgeKind::FalseBranch);
                    i = s.then_range.past_end();
                    cur = join;
                }
            } else if (s.kind == StatementKind::Loop) {
                // the header holds only the loop statement and must not be the
                // entry block, so the back edge never targets the entry
                if (cfg_.blocks[cur].stmts.count != 0 || cur == Cfg::kEntry) {
                    std::size_t header = new_block();
                    link(cur, header, EdgeKind::Fallthrough);
                    cur = header;
                }
                append_stmt(cur, i);
                std::size_t body_b = new_block();
                link(cur, body_b, EdgeKind::TrueBranch);
                std::size_t body_out = lower_range(s.then_range, body_b);
                link(body_out, cur, EdgeKind::LoopBack);
                std::size_t after = new_block();
                link(cur, after, EdgeKind::FalseBranch);
                i = s.then_range.past_end();
                cur = after;
            } else {
                append_stmt(cur, i);
                ++i;
            }
        }
        return cur;
    }

    std::size_t new_block() {
        CfgBlock b;
        b.id = cfg_.blocks.size();
        cfg_.blocks.push_back(b);
        return b.id;
    }

    void append_stmt(std::size_t block, std::size_t stmt_index) {
        CfgBlock& b = cfg_.blocks[block];
        if (b.stmts.count == 0) b.stmts.first = stmt_index;
        ++b.stmts.count;
    }

    void link(std::size_t from, std::size_t to, EdgeKind kind) {
        cfg_.edges.push_back(CfgEdge{from, to, kind});
    }

    Cfg cfg_;
    const std::vector<Statement>* stmts_ = nullptr;
};

inline Cfg build_cfg(const std::vector<Statement>& stmts) {
    return CfgBuilder().build(stmts);
}

} // namespace ckg::sol

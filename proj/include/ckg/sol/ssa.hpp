#pragma once

#include <algorithm>
#include <cassert>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ckg/sol/ast.hpp"
#include "ckg/sol/cfg.hpp"

// Minimal SSA over one function body: dominator tree (Cooper-Harvey-Kennedy),
// dominance frontiers, iterated-frontier phi placement, stack-based renaming.
// Version 0 always denotes the value a variable holds on function entry.

namespace ckg::sol {

struct VersionedVar {
    std::string var;
    unsigned version = 0;
    auto operator<=>(const VersionedVar&) const = default;
};

struct PhiNode {
    std::string var;
    unsigned target = 0;
    std::size_t block = 0;
    // one entry per predecessor, aligned with the block's pred list
    std::vector<std::pair<std::size_t, unsigned>> sources;
};

struct DefSite {
    enum class Kind { Initial, Statement, Phi } kind = Kind::Initial;
    std::size_t stmt_index = 0; // valid when kind == Statement
    std::size_t block = 0;      // valid when kind == Phi
};

struct SsaForm {
    std::map<VersionedVar, DefSite> versioned_vars;
    std::map<std::size_t, std::vector<PhiNode>> phi_nodes; // block id -> phis
    // per-statement resolved versions
    std::vector<std::map<std::string, unsigned>> stmt_uses;
    std::vector<std::map<std::string, unsigned>> stmt_defs;

    std::size_t phi_count() const {
        std::size_t n = 0;
        for (const auto& [b, phis] : phi_nodes) n += phis.size();
        return n;
    }
};

namespace detail {

/// Dominator info over a CFG; block 0 is the root.
struct Dominators {
    std::vector<std::size_t> rpo;       // block ids in reverse post-order
    std::vector<std::size_t> rpo_index; // block id -> position in rpo
    std::vector<std::size_t> idom;      // block id -> immediate dominator
    std::vector<std::set<std::size_t>> frontier;
    std::vector<std::vector<std::size_t>> children; // dominator-tree children
};

inline Dominators compute_dominators(const Cfg& cfg) {
    const std::size_t n = cfg.blocks.size();
    Dominators d;
    d.rpo_index.assign(n, n);

    // iterative post-order from the entry
    std::vector<std::size_t> post;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    std::vector<bool> seen(n, false);
    seen[0] = true;
    while (!stack.empty()) {
        auto& [b, next] = stack.back();
        const auto& succs = cfg.blocks[b].succs;
        if (next < succs.size()) {
            std::size_t s = succs[next++];
            if (!seen[s]) {
                seen[s] = true;
                stack.push_back({s, 0});
            }
        } else {
            post.push_back(b);
            stack.pop_back();
        }
    }
    d.rpo.assign(post.rbegin(), post.rend());
    for (std::size_t i = 0; i < d.rpo.size(); ++i) d.rpo_index[d.rpo[i]] = i;

    const std::size_t undef = n;
    d.idom.assign(n, undef);
    d.idom[0] = 0;
    auto intersect = [&](std::size_t a, std::size_t b) {
        while (a != b) {
            while (d.rpo_index[a] > d.rpo_index[b]) a = d.idom[a];
            while (d.rpo_index[b] > d.rpo_index[a]) b = d.idom[b];
        }
        return a;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t b : d.rpo) {
            if (b == 0) continue;
            std::size_t new_idom = undef;
            for (std::size_t p : cfg.blocks[b].preds) {
                if (d.idom[p] == undef) continue;
                new_idom = new_idom == undef ? p : intersect(new_idom, p);
            }
            if (new_idom != undef && d.idom[b] != new_idom) {
                d.idom[b] = new_idom;
                changed = true;
            }
        }
    }

    d.frontier.assign(n, {});
    for (const CfgBlock& b : cfg.blocks) {
        if (b.preds.size() < 2) continue;
        for (std::size_t p : b.preds) {
            std::size_t runner = p;
            while (runner != d.idom[b.id]) {
                d.frontier[runner].insert(b.id);
                runner = d.idom[runner];
            }
        }
    }

    d.children.assign(n, {});
    for (std::size_t b : d.rpo) {
        if (b != 0) d.children[d.idom[b]].push_back(b);
    }
    // children in RPO order keeps renaming deterministic
    for (auto& kids : d.children)
        std::sort(kids.begin(), kids.end(),
                  [&](std::size_t a, std::size_t b) { return d.rpo_index[a] < d.rpo_index[b]; });
    return d;
}

} // namespace detail

class SsaBuilder {
public:
    SsaForm build(const Cfg& cfg, const std::vector<Statement>& stmts) {
        cfg_ = &cfg;
        stmts_ = &stmts;
        ssa_ = SsaForm{};
        ssa_.stmt_uses.assign(stmts.size(), {});
        ssa_.stmt_defs.assign(stmts.size(), {});
        dom_ = detail::compute_dominators(cfg);

        place_phis();
        counters_.clear();
        stacks_.clear();
        rename_block(0);

        // align phi sources with the block's pred list
        for (auto& [b, phis] : ssa_.phi_nodes) {
            const auto& preds = cfg.blocks[b].preds;
            for (PhiNode& phi : phis) {
                std::vector<std::pair<std::size_t, unsigned>> ordered;
                for (std::size_t p : preds)
                    for (const auto& src : phi.sources)
                        if (src.first == p) ordered.push_back(src);
                phi.sources = std::move(ordered);
            }
        }
        return std::move(ssa_);
    }

private:
    void place_phis() {
        std::map<std::string, std::set<std::size_t>> def_blocks;
        for (const CfgBlock& b : cfg_->blocks) {
            for (std::size_t i = b.stmts.first; i < b.stmts.past_end(); ++i)
                for (const std::string& w : (*stmts_)[i].writes)
                    def_blocks[w].insert(b.id);
        }
        for (const auto& [var, blocks] : def_blocks) {
            std::set<std::size_t> placed;
            std::vector<std::size_t> work(blocks.begin(), blocks.end());
            while (!work.empty()) {
                std::size_t b = work.back();
                work.pop_back();
                for (std::size_t f : dom_.frontier[b]) {
                    if (placed.count(f)) continue;
                    placed.insert(f);
                    PhiNode phi;
                    phi.var = var;
                    phi.block = f;
                    ssa_.phi_nodes[f].push_back(std::move(phi));
                    if (!blocks.count(f)) work.push_back(f);
                }
            }
        }
        // stable per-block order, keyed by variable name
        for (auto& [b, phis] : ssa_.phi_nodes)
            std::sort(phis.begin(), phis.end(),
                      [](const PhiNode& a, const PhiNode& c) { return a.var < c.var; });
    }

    unsigned current_version(const std::string& var) {
        auto it = stacks_.find(var);
        if (it == stacks_.end() || it->second.empty()) {
            // first observation of the entry value
            ssa_.versioned_vars.try_emplace({var, 0}, DefSite{DefSite::Kind::Initial, 0, 0});
            return 0;
        }
        return it->second.back();
    }

    unsigned push_version(const std::string& var) {
        unsigned v = ++counters_[var];
        stacks_[var].push_back(v);
        return v;
    }

    void rename_block(std::size_t b) {
        std::vector<std::string> pushed;

        auto phis_it = ssa_.phi_nodes.find(b);
        if (phis_it != ssa_.phi_nodes.end()) {
            for (PhiNode& phi : phis_it->second) {
                phi.target = push_version(phi.var);
                pushed.push_back(phi.var);
                ssa_.versioned_vars[{phi.var, phi.target}] =
                    DefSite{DefSite::Kind::Phi, 0, b};
            }
        }

        const CfgBlock& blk = cfg_->blocks[b];
        for (std::size_t i = blk.stmts.first; i < blk.stmts.past_end(); ++i) {
            const Statement& s = (*stmts_)[i];
            for (const std::string& r : s.reads)
                ssa_.stmt_uses[i][r] = current_version(r);
            for (const std::string& w : s.writes) {
                unsigned v = push_version(w);
                pushed.push_back(w);
                ssa_.stmt_defs[i][w] = v;
                ssa_.versioned_vars[{w, v}] = DefSite{DefSite::Kind::Statement, i, b};
            }
        }

        for (std::size_t succ : blk.succs) {
            auto it = ssa_.phi_nodes.find(succ);
            if (it == ssa_.phi_nodes.end()) continue;
            for (PhiNode& phi : it->second)
                phi.sources.emplace_back(b, current_version(phi.var));
        }

        for (std::size_t child : dom_.children[b]) rename_block(child);

        for (auto it = pushed.rbegin(); it != pushed.rend(); ++it)
            stacks_[*it].pop_back();
    }

    const Cfg* cfg_ = nullptr;
    const std::vector<Statement>* stmts_ = nullptr;
    detail::Dominators dom_;
    std::map<std::string, unsigned> counters_;
    std::map<std::string, std::vector<unsigned>> stacks_;
    SsaForm ssa_;
};

inline SsaForm to_ssa(const Cfg& cfg, const std::vector<Statement>& stmts) {
    return SsaBuilder().build(cfg, stmts);
}

} // namespace ckg::sol

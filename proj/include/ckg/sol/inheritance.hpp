#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "ckg/errors.hpp"
#include "ckg/sol/ast.hpp"

// C3 linearization in the Solidity style: the merge list ends with the direct
// bases in reverse declaration order, so `contract C is A, B` linearizes to
// [C, B, A] when A and B are independent.

namespace ckg::sol {

class InheritanceResolver {
public:
    explicit InheritanceResolver(const CompilationUnit& unit) {
        for (const ContractDecl& c : unit.contracts) by_name_[c.name] = &c;
    }

    /// Most-derived-first linearization of `name` and its transitive bases.
    std::vector<std::string> linearize(const std::string& name) const {
        auto cached = cache_.find(name);
        if (cached != cache_.end()) return cached->second;

        const ContractDecl* c = lookup(name);
        std::vector<std::vector<std::string>> merge_input;
        for (const std::string& base : c->bases) {
            if (!by_name_.count(base)) throw UnresolvedBase(name, base);
            merge_input.push_back(linearize(base));
        }
        std::vector<std::string> reversed_bases(c->bases.rbegin(), c->bases.rend());
        merge_input.push_back(std::move(reversed_bases));

        std::vector<std::string> out{name};
        merge(merge_input, out, name);
        cache_[name] = out;
        return out;
    }

    /// Functions visible on `name` after override resolution, most-derived wins.
    /// Keyed by signature so overloads stay distinct.
    std::map<std::string, const FunctionDecl*> resolved_functions(const std::string& name) const {
        std::map<std::string, const FunctionDecl*> out;
        for (const std::string& cn : linearize(name)) {
            for (const FunctionDecl& f : lookup(cn)->functions) {
                std::string key = function_symbol(f);
                if (!out.count(key)) out[key] = &f;
            }
        }
        return out;
    }

    /// Modifiers visible on `name`, most-derived wins (keyed by name).
    std::map<std::string, const ModifierDecl*> resolved_modifiers(const std::string& name) const {
        std::map<std::string, const ModifierDecl*> out;
        for (const std::string& cn : linearize(name)) {
            for (const ModifierDecl& m : lookup(cn)->modifiers) {
                if (!out.count(m.name)) out[m.name] = &m;
            }
        }
        return out;
    }

    /// State variables visible on `name`. Shadowing is illegal in Solidity, so
    /// all inherited variables are collected, base-most first.
    std::vector<const StateVarDecl*> resolved_state_vars(const std::string& name) const {
        std::vector<std::string> lin = linearize(name);
        std::vector<const StateVarDecl*> out;
        for (auto it = lin.rbegin(); it != lin.rend(); ++it) {
            for (const StateVarDecl& v : lookup(*it)->state_vars) out.push_back(&v);
        }
        return out;
    }

    const ContractDecl* lookup(const std::string& name) const {
        auto it = by_name_.find(name);
        if (it == by_name_.end()) throw UnresolvedBase(name, name);
        return it->second;
    }

    bool known(const std::string& name) const { return by_name_.count(name) > 0; }

private:
    static void merge(std::vector<std::vector<std::string>>& lists,
                      std::vector<std::string>& out, const std::string& who) {
        auto is_in_tail = [&](const std::string& head) {
            for (const auto& list : lists)
                for (std::size_t i = 1; i < list.size(); ++i)
                    if (list[i] == head) return true;
            return false;
        };
        for (;;) {
            bool all_empty = true;
            for (const auto& list : lists)
                if (!list.empty()) all_empty = false;
            if (all_empty) return;

            std::string picked;
            for (const auto& list : lists) {
                if (list.empty()) continue;
                if (!is_in_tail(list.front())) {
                    picked = list.front();
                    break;
                }
            }
            if (picked.empty()) throw LinearizationError(who);
            out.push_back(picked);
            for (auto& list : lists)
                if (!list.empty() && list.front() == picked)
                    list.erase(list.begin());
        }
    }

    std::map<std::string, const ContractDecl*> by_name_;
    mutable std::map<std::string, std::vector<std::string>> cache_;
};

} // namespace ckg::sol

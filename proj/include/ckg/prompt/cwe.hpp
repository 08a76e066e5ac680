#pragma once

#include <string>
#include <vector>

#include "ckg/errors.hpp"

// The seven supported access-control weakness patterns. Descriptions are
// authored one-paragraph summaries phrased over contract concepts so they can
// be matched against the ontology vocabulary.

namespace ckg::prompt {

struct CwePattern {
    std::string id;
    std::string title;
    std::string nl_pattern;
    std::vector<std::string> target_classes;
};

inline const std::vector<CwePattern>& cwe_patterns() {
    static const std::vector<CwePattern> patterns = {
        {"CWE-284", "Improper Access Control",
         "The contract exposes an externally callable function that changes "
         "privileged state or funds without restricting who may call it. Look "
         "for public or external functions that write owner-like or "
         "role-like state variables, or move assets, while carrying no guard "
         "modifier and no require check on the caller identity.",
         {"Function", "Modifier", "StateVar"}},
        {"CWE-285", "Improper Authorization",
         "The contract performs an authorization check that does not actually "
         "prove the caller holds the required privilege, for example checking "
         "a value the caller controls or comparing against the wrong "
         "authority variable. Look for entry functions whose guard statements "
         "read neither the caller identity nor a recognized authority "
         "variable.",
         {"Function", "Statement", "StateVar"}},
        {"CWE-863", "Incorrect Authorization",
         "An authorization check exists but validates the wrong condition, "
         "such as requiring a role unrelated to the protected action or "
         "testing tx.origin instead of msg.sender. Look for guarded entry "
         "functions whose checks reference an authority unrelated to the "
         "state they modify.",
         {"Function", "Statement", "Modifier"}},
        {"CWE-862", "Missing Authorization",
         "A state-changing operation that should be restricted to a "
         "privileged account performs no authorization check at all. Look "
         "for public or external functions that write authority state "
         "variables and neither apply a guard modifier nor contain a require "
         "statement over the caller identity.",
         {"Function", "StateVar"}},
        {"CWE-269", "Improper Privilege Management",
         "The contract grants, transfers, or revokes privileges in a way "
         "that lets an unprivileged caller escalate, for example an "
         "unguarded owner-transfer or role-grant function. Look for entry "
         "functions that write owner or role variables without a guard tied "
         "to the current privilege holder.",
         {"Function", "StateVar", "Modifier"}},
        {"CWE-276", "Incorrect Default Permissions",
         "The contract leaves a privileged capability open by default, such "
         "as an initializer or configuration function callable by anyone "
         "before or after deployment. Look for public initialization-style "
         "functions that set authority variables and can be re-invoked "
         "without restriction.",
         {"Function", "StateVar"}},
        {"CWE-732", "Incorrect Permission Assignment for Critical Resource",
         "A critical resource such as a funds balance, upgrade pointer, or "
         "role registry is writable through a path whose permission check "
         "does not match the sensitivity of the resource. Look for "
         "statements writing critical state reachable from entry functions "
         "whose guards are absent or weaker than the guard on comparable "
         "functions.",
         {"Function", "Statement", "StateVar"}},
    };
    return patterns;
}

inline const CwePattern& cwe_pattern(const std::string& id) {
    for (const CwePattern& p : cwe_patterns())
        if (p.id == id) return p;
    throw UnknownCwe(id);
}

} // namespace ckg::prompt

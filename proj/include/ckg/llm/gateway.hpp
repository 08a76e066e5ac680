#pragma once

#include <cctype>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "ckg/errors.hpp"
#include "ckg/kg/ontology.hpp"
#include "ckg/kg/summary.hpp"
#include "ckg/prompt/builder.hpp"
#include "ckg/prompt/cwe.hpp"

// Chat endpoint access. The http backend speaks the OpenAI-compatible
// chat-completions wire format; the mock backend resolves replies from a
// fixture directory keyed by a stable hash of the outbound messages, which
// keeps every test and every detection run replayable.

namespace ckg::llm {

enum class Role { System, User, Assistant };

inline const char* to_string(Role r) {
    switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    default: return "assistant";
    }
}

struct ChatMessage {
    Role role = Role::User;
    std::string content;
};

enum class Backend { Http, Mock };

struct EndpointConfig {
    Backend backend = Backend::Mock;
    std::string base_url;
    std::string model_name = "mock-model";
    std::string api_key_ref = "CKG_LLM_API_KEY";
    double temperature = 0.0;
    int max_retries = 3;
    double timeout_seconds = 60.0;
    std::string fixture_dir;
    int retry_base_delay_ms = 250;
    int max_in_flight = 4;
    double requests_per_second = 0.0; // 0 disables rate limiting
};

struct DialogueRound {
    std::vector<ChatMessage> prompt;
    std::string reply;
    double latency_seconds = 0.0;
};

struct DialogueTranscript {
    std::vector<DialogueRound> rounds;
    std::optional<std::string> extracted_query;
};

inline constexpr const char* kSystemPrompt =
    "You are a smart contract security analyst. Follow the requested "
    "reply structure exactly and keep identifiers verbatim.";

// FNV-1a over the role-tagged message contents; stable across platforms so
// fixture files recorded once stay valid everywhere.
inline std::uint64_t message_hash(const std::vector<ChatMessage>& messages) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        h ^= 0xff;
        h *= 1099511628211ull;
    };
    for (const ChatMessage& m : messages) {
        mix(to_string(m.role));
        mix(m.content);
    }
    return h;
}

inline std::string message_hash_hex(const std::vector<ChatMessage>& messages) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = message_hash(messages);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

namespace detail {

inline bool transient_status(int status) {
    return status == 408 || status == 429 || (status >= 500 && status < 600);
}

// Process-wide throttle shared by all http calls: a plain in-flight counter
// plus a minimum spacing between request starts.
class Throttle {
public:
    static Throttle& instance() {
        static Throttle t;
        return t;
    }

    void acquire(int max_in_flight, double requests_per_second) {
        std::unique_lock<std::mutex> lock(mu_);
        if (max_in_flight > 0)
            cv_.wait(lock, [&] { return in_flight_ < max_in_flight; });
        ++in_flight_;
        if (requests_per_second > 0.0) {
            auto min_gap = std::chrono::duration<double>(1.0 / requests_per_second);
            auto now = std::chrono::steady_clock::now();
            auto earliest =
                last_start_ +
                std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                    min_gap);
            if (now < earliest) {
                lock.unlock();
                std::this_thread::sleep_until(earliest);
                lock.lock();
            }
            last_start_ = std::chrono::steady_clock::now();
        }
    }

    void release() {
        {
            std::lock_guard<std::mutex> lock(mu_);
            --in_flight_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int in_flight_ = 0;
    std::chrono::steady_clock::time_point last_start_{};
};

struct SplitUrl {
    std::string host_part; // scheme://host[:port]
    std::string path_prefix;
};

inline SplitUrl split_url(const std::string& base_url) {
    std::size_t scheme = base_url.find("://");
    if (scheme == std::string::npos)
        throw Error("endpoint base_url lacks a scheme: " + base_url);
    std::size_t slash = base_url.find('/', scheme + 3);
    SplitUrl out;
    if (slash == std::string::npos) {
        out.host_part = base_url;
    } else {
        out.host_part = base_url.substr(0, slash);
        out.path_prefix = base_url.substr(slash);
        while (!out.path_prefix.empty() && out.path_prefix.back() == '/')
            out.path_prefix.pop_back();
    }
    return out;
}

inline std::string body_excerpt(const std::string& body) {
    return body.size() <= 200 ? body : body.substr(0, 200);
}

inline std::string http_complete(const std::vector<ChatMessage>& messages,
                                 const EndpointConfig& cfg) {
    if (cfg.base_url.empty())
        throw Error("http backend requires base_url");
    SplitUrl url = split_url(cfg.base_url);

    nlohmann::json request;
    request["model"] = cfg.model_name;
    request["messages"] = nlohmann::json::array();
    for (const ChatMessage& m : messages)
        request["messages"].push_back(
            {{"role", to_string(m.role)}, {"content", m.content}});
    request["temperature"] = cfg.temperature;
    std::string body = request.dump();

    httplib::Headers headers;
    if (const char* key = std::getenv(cfg.api_key_ref.c_str()))
        headers.emplace("Authorization", std::string("Bearer ") + key);

    for (int attempt = 0;; ++attempt) {
        Throttle::instance().acquire(cfg.max_in_flight, cfg.requests_per_second);
        httplib::Client client(url.host_part);
        client.set_connection_timeout(std::chrono::duration<double>(cfg.timeout_seconds));
        client.set_read_timeout(std::chrono::duration<double>(cfg.timeout_seconds));
        auto res = client.Post(url.path_prefix + "/chat/completions", headers,
                               body, "application/json");
        Throttle::instance().release();

        bool transient;
        int status;
        std::string detail;
        if (!res) {
            transient = true;
            status = 0;
            detail = "connection failed: " + httplib::to_string(res.error());
        } else if (res->status == 200) {
            nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
            if (reply.is_discarded() || !reply.contains("choices") ||
                reply["choices"].empty() ||
                !reply["choices"][0].contains("message"))
                throw EndpointError(200, "malformed completion body: " +
                                             body_excerpt(res->body));
            return reply["choices"][0]["message"].value("content", "");
        } else {
            transient = transient_status(res->status);
            status = res->status;
            detail = body_excerpt(res->body);
        }

        if (!transient || attempt >= cfg.max_retries)
            throw EndpointError(status, detail);
        auto delay = std::chrono::milliseconds(
            static_cast<long long>(cfg.retry_base_delay_ms) << attempt);
        std::this_thread::sleep_for(delay);
    }
}

inline std::string mock_complete(const std::vector<ChatMessage>& messages,
                                 const EndpointConfig& cfg) {
    if (cfg.fixture_dir.empty())
        throw Error("mock backend requires fixture_dir");
    std::string path = cfg.fixture_dir;
    if (path.back() != '/') path += '/';
    path += message_hash_hex(messages) + ".txt";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFixture(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace detail

inline std::string complete(const std::vector<ChatMessage>& messages,
                            const EndpointConfig& cfg) {
    if (cfg.backend == Backend::Mock) return detail::mock_complete(messages, cfg);
    return detail::http_complete(messages, cfg);
}

namespace detail {

struct Fence {
    std::string label;
    std::string content;
};

inline std::vector<Fence> fenced_blocks(const std::string& reply) {
    std::vector<Fence> out;
    std::istringstream in(reply);
    std::string line;
    bool open = false;
    Fence current;
    while (std::getline(in, line)) {
        std::string t = line;
        while (!t.empty() && (t.back() == '\r' || t.back() == ' ')) t.pop_back();
        std::size_t b = t.find_first_not_of(' ');
        std::string core = b == std::string::npos ? "" : t.substr(b);
        if (core.rfind("```", 0) == 0) {
            if (!open) {
                open = true;
                current.label.clear();
                current.content.clear();
                std::string label = core.substr(3);
                for (char& c : label)
                    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                current.label = label;
            } else {
                open = false;
                out.push_back(current);
            }
            continue;
        }
        if (open) current.content += line + "\n";
    }
    return out;
}

inline bool contains_keyword(const std::string& text, const std::string& word) {
    std::string upper;
    upper.reserve(text.size());
    for (char c : text)
        upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    std::size_t pos = 0;
    while ((pos = upper.find(word, pos)) != std::string::npos) {
        bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(upper[pos - 1]));
        std::size_t end = pos + word.size();
        bool right = end >= upper.size() ||
                     !std::isalnum(static_cast<unsigned char>(upper[end]));
        if (left && right) return true;
        pos = end;
    }
    return false;
}

inline std::size_t find_keyword(const std::string& text, const std::string& word) {
    std::string upper;
    upper.reserve(text.size());
    for (char c : text)
        upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    std::size_t pos = 0;
    while ((pos = upper.find(word, pos)) != std::string::npos) {
        bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(upper[pos - 1]));
        std::size_t end = pos + word.size();
        bool right = end >= upper.size() ||
                     !std::isalnum(static_cast<unsigned char>(upper[end]));
        if (left && right) return pos;
        pos = end;
    }
    return std::string::npos;
}

} // namespace detail

// Pulls the final query out of a model reply. Preference order: last fence
// labeled sparql, then last unlabeled fence containing a SELECT keyword,
// then the raw keyword-to-closing-brace span. Last fence wins because models
// often emit a draft before the corrected block.
inline std::string extract_sparql(const std::string& reply) {
    std::vector<detail::Fence> fences = detail::fenced_blocks(reply);
    for (auto it = fences.rbegin(); it != fences.rend(); ++it)
        if (it->label == "sparql") return it->content;
    for (auto it = fences.rbegin(); it != fences.rend(); ++it)
        if (it->label.empty() && detail::contains_keyword(it->content, "SELECT"))
            return it->content;

    std::size_t start = detail::find_keyword(reply, "PREFIX");
    std::size_t select_at = detail::find_keyword(reply, "SELECT");
    if (start == std::string::npos || (select_at != std::string::npos && select_at < start))
        start = select_at;
    if (start == std::string::npos)
        throw ExtractionFailure("no fenced sparql block and no SELECT keyword");
    std::size_t brace = reply.rfind('}');
    if (brace == std::string::npos || brace < start)
        throw ExtractionFailure("SELECT found but no closing brace");
    std::size_t end = brace + 1;
    // keep a trailing LIMIT clause that follows the closing brace
    std::size_t probe = end;
    while (probe < reply.size() &&
           std::isspace(static_cast<unsigned char>(reply[probe])))
        ++probe;
    if (detail::find_keyword(reply.substr(probe, 5), "LIMIT") == 0) {
        std::size_t num = probe + 5;
        while (num < reply.size() &&
               std::isspace(static_cast<unsigned char>(reply[num])))
            ++num;
        std::size_t num_end = num;
        while (num_end < reply.size() &&
               std::isdigit(static_cast<unsigned char>(reply[num_end])))
            ++num_end;
        if (num_end > num) end = num_end;
    }
    return reply.substr(start, end - start);
}

struct TwoRoundResult {
    DialogueTranscript transcript;
    std::optional<std::string> failure; // set when round 2 yields no query
};

// Runs both dialogue rounds and records everything sent and received. The
// non-throwing shape exists so the pipeline can keep the transcript when
// extraction fails.
inline TwoRoundResult two_round_dialogue(const prompt::CwePattern& pattern,
                                         const kg::OntologySchema& schema,
                                         const kg::KgSummary& summary,
                                         const EndpointConfig& cfg) {
    using clock = std::chrono::steady_clock;
    TwoRoundResult out;

    prompt::PromptRound round1 = prompt::build_round_one(pattern, schema, summary);
    std::vector<ChatMessage> messages = {
        {Role::System, kSystemPrompt},
        {Role::User, round1.render()},
    };
    auto t0 = clock::now();
    std::string reply1 = complete(messages, cfg);
    auto t1 = clock::now();
    out.transcript.rounds.push_back(
        {messages, reply1, std::chrono::duration<double>(t1 - t0).count()});

    prompt::PromptRound round2 = prompt::build_round_two(reply1, pattern, schema);
    messages.push_back({Role::Assistant, reply1});
    messages.push_back({Role::User, round2.render()});
    auto t2 = clock::now();
    std::string reply2 = complete(messages, cfg);
    auto t3 = clock::now();
    out.transcript.rounds.push_back(
        {messages, reply2, std::chrono::duration<double>(t3 - t2).count()});

    try {
        out.transcript.extracted_query = extract_sparql(reply2);
    } catch (const ExtractionFailure& e) {
        out.failure = e.what();
    }
    return out;
}

inline DialogueTranscript run_two_rounds(const prompt::CwePattern& pattern,
                                         const kg::OntologySchema& schema,
                                         const kg::KgSummary& summary,
                                         const EndpointConfig& cfg) {
    TwoRoundResult result = two_round_dialogue(pattern, schema, summary, cfg);
    if (result.failure) throw ExtractionFailure(*result.failure);
    return std::move(result.transcript);
}

} // namespace ckg::llm

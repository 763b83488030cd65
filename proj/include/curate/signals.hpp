#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "curate/error.hpp"
#include "curate/record.hpp"
#include "curate/text.hpp"

namespace curate {

// Comment syntax and marker tables for the six primary languages.
// Unknown languages fall back to combined '#' / '//' heuristics.
struct LanguageTable {
    std::string name;
    std::vector<std::string> line_comment;     // full-line and trailing leaders
    bool block_comments = false;               // C-style /* ... */
    bool python_defs = false;                  // 'def ' style definitions
    bool function_keyword = false;             // 'function' / '=>' definitions
    bool brace_defs = false;                   // '... ( ... ) {' definitions
    std::vector<std::string> print_markers;
};

inline const LanguageTable& language_table(std::string_view language) {
    static const LanguageTable kPython{
        "python", {"#"}, false, true, false, false, {"print("}};
    static const LanguageTable kJava{
        "java", {"//"}, true, false, false, true,
        {"System.out.print", "System.err.print"}};
    static const LanguageTable kCSharp{
        "csharp", {"//"}, true, false, false, true, {"Console.Write"}};
    static const LanguageTable kCpp{
        "cpp", {"//"}, true, false, false, true,
        {"printf", "cout <<", "cout<<", "cerr <<", "cerr<<"}};
    static const LanguageTable kC{
        "c", {"//"}, true, false, false, true, {"printf", "fprintf", "puts("}};
    static const LanguageTable kJavaScript{
        "javascript", {"//"}, true, false, true, true,
        {"console.log", "console.error", "console.warn"}};
    static const LanguageTable kUnknown{
        "unknown", {"#", "//"}, false, true, true, true,
        {"print(", "printf", "console.log"}};
    if (language == "python") return kPython;
    if (language == "java") return kJava;
    if (language == "csharp") return kCSharp;
    if (language == "cpp") return kCpp;
    if (language == "c") return kC;
    if (language == "javascript") return kJavaScript;
    return kUnknown;
}

namespace detail {

inline bool is_base64_char(unsigned char c) {
    return std::isalnum(c) || c == '+' || c == '/' || c == '=';
}

// Line classification shared by several signals.
struct LineInfo {
    bool blank = false;
    bool comment = false;           // whole line is a comment
    bool trailing_comment = false;  // code followed by a comment
    bool printy = false;
    bool def_line = false;
};

inline bool is_control_header(std::string_view trimmed) {
    static const char* kControl[] = {"if",    "else", "for",   "while",
                                     "switch", "catch", "do",   "try"};
    for (const char* kw : kControl) {
        std::string_view k(kw);
        if (starts_with(trimmed, k)) {
            if (trimmed.size() == k.size()) return true;
            char next = trimmed[k.size()];
            if (next == ' ' || next == '(' || next == '{') return true;
        }
    }
    return false;
}

inline bool looks_like_brace_def(std::string_view trimmed) {
    if (trimmed.empty() || trimmed.back() != '{') return false;
    auto open = trimmed.find('(');
    auto close = trimmed.rfind(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        return false;
    }
    return !is_control_header(trimmed);
}

inline std::vector<LineInfo> classify_lines(const std::vector<std::string_view>& lines,
                                            const LanguageTable& table) {
    std::vector<LineInfo> infos(lines.size());
    bool in_block_comment = false;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        std::string_view line = lines[li];
        LineInfo& info = infos[li];
        if (is_blank(line)) {
            info.blank = true;
            continue;
        }
        std::string_view trimmed = trim(line);
        if (in_block_comment) {
            info.comment = true;
            auto end = trimmed.find("*/");
            if (end != std::string_view::npos) in_block_comment = false;
            continue;
        }
        for (const auto& leader : table.line_comment) {
            if (starts_with(trimmed, leader)) {
                info.comment = true;
                break;
            }
        }
        if (!info.comment && table.block_comments && starts_with(trimmed, "/*")) {
            info.comment = true;
            if (trimmed.find("*/", 2) == std::string_view::npos) in_block_comment = true;
        }
        if (info.comment) continue;

        // Trailing comment: a leader somewhere after code.
        for (const auto& leader : table.line_comment) {
            auto pos = trimmed.find(leader);
            if (pos != std::string_view::npos && pos > 0) {
                info.trailing_comment = true;
                break;
            }
        }

        for (const auto& marker : table.print_markers) {
            if (trimmed.find(marker) != std::string_view::npos) {
                info.printy = true;
                break;
            }
        }
        if (!info.printy && (trimmed.find("TODO") != std::string_view::npos ||
                             trimmed.find("FIXME") != std::string_view::npos)) {
            info.printy = true;
        }

        if (table.python_defs &&
            (starts_with(trimmed, "def ") || starts_with(trimmed, "async def "))) {
            info.def_line = true;
        }
        if (!info.def_line && table.function_keyword) {
            if (trimmed.find("function ") != std::string_view::npos ||
                starts_with(trimmed, "function(") ||
                trimmed.find("=>") != std::string_view::npos) {
                info.def_line = true;
            }
        }
        if (!info.def_line && table.brace_defs) {
            if (looks_like_brace_def(trimmed)) {
                info.def_line = true;
            } else if (!trimmed.empty() && trimmed.back() == ')' &&
                       trimmed.find('(') != std::string_view::npos &&
                       !is_control_header(trimmed)) {
                // Allman style: ') ' line followed by a lone '{'.
                for (std::size_t next = li + 1; next < lines.size(); ++next) {
                    if (is_blank(lines[next])) continue;
                    if (trim(lines[next]) == "{") info.def_line = true;
                    break;
                }
            }
        }
    }
    return infos;
}

// Fraction of characters inside same-type quote pairs, paired left to
// right within each line. The quote characters themselves do not count.
inline std::size_t quoted_chars_in_line(std::string_view line) {
    std::size_t quoted = 0;
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (c == '"' || c == '\'') {
            auto close = line.find(c, i + 1);
            if (close == std::string_view::npos) break;
            quoted += close - i - 1;
            i = close + 1;
        } else {
            ++i;
        }
    }
    return quoted;
}

}  // namespace detail

// Computes every quality signal for one record. Deterministic, pure, and
// bounded on arbitrary UTF-8 input.
inline SignalVector compute_signals(const DocumentRecord& rec) {
    if (rec.content.empty()) throw EmptyDocument("compute_signals: empty content");
    const std::string& content = rec.content;
    const double total = static_cast<double>(content.size());
    const LanguageTable& table = language_table(rec.language);

    SignalVector sv;

    std::size_t alnum = 0;
    std::size_t whitespace = 0;
    for (unsigned char c : content) {
        if (std::isalnum(c)) ++alnum;
        if (std::isspace(c)) ++whitespace;
    }
    sv.alnum_ratio = alnum / total;
    sv.whitespace_ratio = whitespace / total;

    // Encoded-data runs: maximal base64-alphabet runs of length >= 64.
    {
        std::size_t encoded = 0;
        std::size_t run = 0;
        for (std::size_t i = 0; i <= content.size(); ++i) {
            if (i < content.size() && detail::is_base64_char(content[i])) {
                ++run;
            } else {
                if (run >= 64) encoded += run;
                run = 0;
            }
        }
        sv.encoded_data_pct = encoded / total;
    }

    auto lines = split_lines(content);
    auto infos = detail::classify_lines(lines, table);

    std::size_t quoted = 0;
    for (auto line : lines) quoted += detail::quoted_chars_in_line(line);
    sv.quoted_fraction = std::min(1.0, quoted / total);

    // Duplicate word 5-grams: fraction of gram instances that are repeats.
    {
        auto tokens = split_tokens(content);
        const std::size_t k = 5;
        if (tokens.size() >= k) {
            std::unordered_set<std::string> seen;
            std::size_t grams = tokens.size() - k + 1;
            for (std::size_t i = 0; i + k <= tokens.size(); ++i) {
                std::string gram;
                for (std::size_t t = 0; t < k; ++t) {
                    if (t) gram.push_back(' ');
                    gram.append(tokens[i + t]);
                }
                seen.insert(std::move(gram));
            }
            sv.duplicate_gram_fraction =
                static_cast<double>(grams - seen.size()) / static_cast<double>(grams);
        }
    }

    std::size_t non_blank = 0;
    std::size_t comment_lines = 0;
    std::size_t code_lines = 0;
    std::size_t trailing = 0;
    std::size_t printy = 0;
    std::size_t defs = 0;
    std::size_t documented_defs = 0;
    for (std::size_t li = 0; li < infos.size(); ++li) {
        const auto& info = infos[li];
        if (info.blank) continue;
        ++non_blank;
        if (info.comment) {
            ++comment_lines;
        } else {
            ++code_lines;
        }
        if (info.trailing_comment) ++trailing;
        if (info.printy) ++printy;
        if (!info.def_line) continue;
        ++defs;
        if (table.python_defs && !table.brace_defs) {
            // Documented when the next non-blank line opens a docstring.
            for (std::size_t next = li + 1; next < lines.size(); ++next) {
                if (infos[next].blank) continue;
                auto t = trim(lines[next]);
                if (starts_with(t, "\"\"\"") || starts_with(t, "'''")) ++documented_defs;
                break;
            }
        } else {
            // Documented when the preceding non-blank line is a comment.
            for (std::size_t prev = li; prev-- > 0;) {
                if (infos[prev].blank) continue;
                if (infos[prev].comment) ++documented_defs;
                break;
            }
        }
    }

    sv.lines_per_function =
        static_cast<double>(non_blank) / static_cast<double>(std::max<std::size_t>(1, defs));
    sv.printy_stmt_pct =
        non_blank == 0 ? 0.0 : static_cast<double>(printy) / static_cast<double>(non_blank);
    sv.comment_code_ratio = static_cast<double>(comment_lines) /
                            static_cast<double>(std::max<std::size_t>(1, code_lines));
    sv.docstring_density = static_cast<double>(documented_defs) /
                           static_cast<double>(std::max<std::size_t>(1, defs));
    sv.inline_explanation_freq =
        non_blank == 0 ? 0.0 : 100.0 * static_cast<double>(trailing) / static_cast<double>(non_blank);

    const std::uint64_t est = rec.est_tokens > 0 ? rec.est_tokens : default_token_estimate(content);
    sv.char_token_ratio = total / static_cast<double>(est);

    return sv;
}

}  // namespace curate

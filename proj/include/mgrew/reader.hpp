#pragma once

#include <mgrew/expression.hpp>
#include <mgrew/metagraph.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace mgrew {

struct ParseOptions {
    /// When set, (!rule ...) forms are handed back as plain lists headed by
    /// the symbol "!rule" instead of being rejected. Used by the rule loader.
    bool allow_rule_directives = false;
};

/// Parses exactly one expression; anything but whitespace and comments after
/// it is an error. $name tokens become variables, &name tokens grounded
/// symbols, "..." literals plain symbols, and (!enrich "kind" <base64> e)
/// attaches an enrichment to e. Throws ParseError with line/column.
Expression parse(std::string_view text);

/// Parses a whole space file: zero or more expressions until end of input.
std::vector<Expression> parse_stream(std::string_view text, const ParseOptions& options = {});

/// One root expression per line, in EdgeId order. load(dump(s)) rebuilds a
/// space whose root expressions are structurally equal to s's, and
/// dump(load(dump(s))) == dump(s).
std::string dump(const Metagraph& space);

Metagraph load(std::string_view text);

}  // namespace mgrew

#include <mgrew/expression.hpp>

#include <mgrew/base64.hpp>
#include <mgrew/errors.hpp>

#include <algorithm>
#include <cctype>

namespace mgrew {

namespace {

void require_name(const std::string& name) {
    if (name.empty()) {
        throw Error("label names must be non-empty");
    }
}

// Variable and grounded names have no quoted form in the surface syntax, so
// they must be bare tokens to round-trip through dump/load.
void require_token_name(const std::string& name, const char* what) {
    if (!is_bare_token(name)) {
        throw Error(std::string(what) + " name is not a valid token: " + name);
    }
}

void append_text(const Expression& e, std::string& out) {
    if (e.enrichment()) {
        const Enrichment& enr = *e.enrichment();
        out += "(!enrich \"";
        for (char c : enr.kind) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
        }
        out += "\" ";
        out += base64::encode(enr.payload);
        out += ' ';
        append_text(e.without_enrichment(), out);
        out += ')';
        return;
    }
    switch (e.label().kind()) {
        case LabelKind::Symbol: {
            const std::string& name = e.label().name();
            if (is_bare_token(name)) {
                out += name;
            } else {
                out += '"';
                for (char c : name) {
                    if (c == '"' || c == '\\') out += '\\';
                    out += c;
                }
                out += '"';
            }
            return;
        }
        case LabelKind::Variable:
            out += '$';
            out += e.label().name();
            return;
        case LabelKind::Grounded:
            out += '&';
            out += e.label().name();
            return;
        case LabelKind::List: {
            out += '(';
            bool first = true;
            for (const Expression& child : e.children()) {
                if (!first) out += ' ';
                first = false;
                append_text(child, out);
            }
            out += ')';
            return;
        }
    }
}

}  // namespace

bool is_bare_token(const std::string& name) {
    if (name.empty()) return false;
    const char first = name.front();
    if (first == '$' || first == '&' || first == '!') return false;
    return std::ranges::none_of(name, [](unsigned char c) {
        return std::isspace(c) || c == '(' || c == ')' || c == '"' || c == ';' || c == '\\';
    });
}

Expression Expression::symbol(std::string name) {
    require_name(name);
    return Expression(Label::symbol(std::move(name)), {});
}

Expression Expression::variable(std::string name) {
    require_name(name);
    require_token_name(name, "variable");
    return Expression(Label::variable(std::move(name)), {});
}

Expression Expression::grounded(std::string name) {
    require_name(name);
    require_token_name(name, "grounded symbol");
    return Expression(Label::grounded(std::move(name)), {});
}

Expression Expression::list(std::vector<Expression> children) {
    return Expression(Label::list(), std::move(children));
}

Expression Expression::with_enrichment(Enrichment enr) const {
    Expression copy = *this;
    copy.enrichment_ = std::move(enr);
    return copy;
}

Expression Expression::without_enrichment() const {
    Expression copy = *this;
    copy.enrichment_.reset();
    return copy;
}

std::vector<std::string> Expression::free_variables() const {
    std::vector<std::string> names;
    auto walk = [&](auto&& self, const Expression& e) -> void {
        if (e.is_variable()) {
            if (std::ranges::find(names, e.label().name()) == names.end()) {
                names.push_back(e.label().name());
            }
            return;
        }
        for (const Expression& child : e.children()) self(self, child);
    };
    walk(walk, *this);
    return names;
}

bool Expression::contains_variable(const std::string& name) const {
    if (is_variable()) return label_.name() == name;
    return std::ranges::any_of(children_,
                               [&](const Expression& c) { return c.contains_variable(name); });
}

std::string Expression::to_text() const {
    std::string out;
    append_text(*this, out);
    return out;
}

bool Expression::operator==(const Expression& other) const {
    return (*this <=> other) == std::strong_ordering::equal;
}

std::strong_ordering Expression::operator<=>(const Expression& other) const {
    if (auto cmp = label_ <=> other.label_; cmp != 0) return cmp;
    if (auto cmp = enrichment_ <=> other.enrichment_; cmp != 0) return cmp;
    return std::lexicographical_compare_three_way(children_.begin(), children_.end(),
                                                  other.children_.begin(), other.children_.end());
}

}  // namespace mgrew

#include "pmad/xml.hpp"

#include <cctype>
#include <cstdlib>

#include "pmad/error.hpp"

namespace pmad::xml {

const std::string* Node::attribute(const std::string& key) const {
    for (const auto& [k, v] : attributes)
        if (k == key) return &v;
    return nullptr;
}

const Node* Node::first_child(const std::string& name) const {
    for (const auto& c : children)
        if (c.name == name) return &c;
    return nullptr;
}

std::vector<const Node*> Node::children_named(const std::string& name) const {
    std::vector<const Node*> out;
    for (const auto& c : children)
        if (c.name == name) out.push_back(&c);
    return out;
}

namespace {

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    Node parse_document() {
        skip_prolog();
        Node root = parse_element();
        skip_misc();
        if (pos_ != text_.size()) fail("trailing content after root element");
        return root;
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;

    [[noreturn]] void fail(const std::string& msg) const {
        throw FormatError("xml parse error at line " + std::to_string(line_) + ": " + msg);
    }

    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    char advance() {
        char c = text_[pos_++];
        if (c == '\n') ++line_;
        return c;
    }

    bool starts_with(const char* s) const { return text_.compare(pos_, std::string(s).size(), s) == 0; }

    void expect(char c) {
        if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
        advance();
    }

    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) advance();
    }

    void skip_until(const char* terminator) {
        const std::string term(terminator);
        while (!eof()) {
            if (text_.compare(pos_, term.size(), term) == 0) {
                for (std::size_t i = 0; i < term.size(); ++i) advance();
                return;
            }
            advance();
        }
        fail("unterminated markup, missing '" + term + "'");
    }

    void skip_prolog() {
        // BOM
        if (text_.compare(pos_, 3, "\xEF\xBB\xBF") == 0) pos_ += 3;
        skip_misc();
    }

    void skip_misc() {
        for (;;) {
            skip_ws();
            if (starts_with("<?")) {
                skip_until("?>");
            } else if (starts_with("<!--")) {
                skip_until("-->");
            } else if (starts_with("<!DOCTYPE")) {
                skip_until(">");
            } else {
                return;
            }
        }
    }

    std::string parse_name() {
        std::size_t start = pos_;
        while (!eof()) {
            char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':' ||
                c == '.') {
                advance();
            } else {
                break;
            }
        }
        if (pos_ == start) fail("expected a name");
        return text_.substr(start, pos_ - start);
    }

    std::string decode_entities(const std::string& raw) {
        std::string out;
        out.reserve(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] != '&') {
                out.push_back(raw[i]);
                continue;
            }
            std::size_t semi = raw.find(';', i);
            if (semi == std::string::npos) fail("unterminated entity reference");
            std::string ent = raw.substr(i + 1, semi - i - 1);
            if (ent == "lt")
                out.push_back('<');
            else if (ent == "gt")
                out.push_back('>');
            else if (ent == "amp")
                out.push_back('&');
            else if (ent == "apos")
                out.push_back('\'');
            else if (ent == "quot")
                out.push_back('"');
            else if (!ent.empty() && ent[0] == '#') {
                long code = (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X'))
                                ? std::strtol(ent.c_str() + 2, nullptr, 16)
                                : std::strtol(ent.c_str() + 1, nullptr, 10);
                if (code <= 0 || code > 0x10FFFF) fail("invalid character reference");
                // UTF-8 encode
                unsigned long cp = static_cast<unsigned long>(code);
                if (cp < 0x80) {
                    out.push_back(static_cast<char>(cp));
                } else if (cp < 0x800) {
                    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
                    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
                } else if (cp < 0x10000) {
                    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
                    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
                    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
                } else {
                    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
                    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
                    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
                    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
                }
            } else {
                fail("unknown entity '&" + ent + ";'");
            }
            i = semi;
        }
        return out;
    }

    Node parse_element() {
        expect('<');
        Node node;
        node.line = line_;
        node.name = parse_name();
        for (;;) {
            skip_ws();
            if (eof()) fail("unterminated start tag for <" + node.name + ">");
            if (peek() == '/') {
                advance();
                expect('>');
                return node;  // self-closing
            }
            if (peek() == '>') {
                advance();
                break;
            }
            std::string key = parse_name();
            skip_ws();
            expect('=');
            skip_ws();
            if (eof() || (peek() != '"' && peek() != '\'')) fail("attribute value must be quoted");
            char quote = advance();
            std::size_t start = pos_;
            while (!eof() && peek() != quote) advance();
            if (eof()) fail("unterminated attribute value");
            std::string value = decode_entities(text_.substr(start, pos_ - start));
            advance();  // closing quote
            node.attributes.emplace_back(std::move(key), std::move(value));
        }

        // content
        for (;;) {
            if (eof()) fail("missing end tag for <" + node.name + ">");
            if (peek() == '<') {
                if (starts_with("<!--")) {
                    skip_until("-->");
                } else if (starts_with("<![CDATA[")) {
                    for (std::size_t i = 0; i < 9; ++i) advance();
                    std::size_t start = pos_;
                    while (!eof() && !starts_with("]]>")) advance();
                    if (eof()) fail("unterminated CDATA section");
                    node.text += text_.substr(start, pos_ - start);
                    skip_until("]]>");
                } else if (starts_with("<?")) {
                    skip_until("?>");
                } else if (starts_with("</")) {
                    advance();
                    advance();
                    std::string closing = parse_name();
                    if (closing != node.name)
                        fail("mismatched end tag </" + closing + "> for <" + node.name + ">");
                    skip_ws();
                    expect('>');
                    return node;
                } else {
                    node.children.push_back(parse_element());
                }
            } else {
                std::size_t start = pos_;
                while (!eof() && peek() != '<') advance();
                node.text += decode_entities(text_.substr(start, pos_ - start));
            }
        }
    }
};

}  // namespace

Node parse(const std::string& text) {
    Parser parser(text);
    return parser.parse_document();
}

std::string escape(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace pmad::xml

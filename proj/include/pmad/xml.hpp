#pragma once

#include <string>
#include <utility>
#include <vector>

namespace pmad::xml {

// Minimal DOM for the XES/PNML subset: elements, attributes, text,
// comments, CDATA and the five predefined entities. No namespaces, no DTD.
struct Node {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<Node> children;
    std::string text;  // concatenated character data
    int line = 0;

    const std::string* attribute(const std::string& key) const;
    const Node* first_child(const std::string& name) const;
    std::vector<const Node*> children_named(const std::string& name) const;
};

// Parses a full document and returns the root element.
// Throws FormatError with a line number on malformed input.
Node parse(const std::string& text);

std::string escape(const std::string& raw);

}  // namespace pmad::xml

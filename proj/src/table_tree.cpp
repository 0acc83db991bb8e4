#include "tabrec/table_tree.hpp"

#include <cctype>

namespace tabrec {

const char* tag_name(Tag tag) {
    switch (tag) {
        case Tag::Table: return "table";
        case Tag::Thead: return "thead";
        case Tag::Tbody: return "tbody";
        case Tag::Tr: return "tr";
        case Tag::Td: return "td";
    }
    return "?";
}

namespace {

void serialize(const TableTree& node, std::string& out) {
    if (node.tag == Tag::Td) {
        out += "<td";
        if (node.colspan > 1) {
            out += " colspan=\"";
            out += std::to_string(node.colspan);
            out += '"';
        }
        if (node.rowspan > 1) {
            out += " rowspan=\"";
            out += std::to_string(node.rowspan);
            out += '"';
        }
        out += '>';
        out += node.content;
        out += "</td>";
        return;
    }
    out += '<';
    out += tag_name(node.tag);
    out += '>';
    for (const auto& child : node.children) serialize(child, out);
    out += "</";
    out += tag_name(node.tag);
    out += '>';
}

class Parser {
public:
    explicit Parser(std::string_view html) : s_(html) {}

    TableTree parse() {
        skip_ws();
        expect("<table>");
        TableTree table = TableTree::table();
        bool saw_thead = false, saw_tbody = false;
        for (;;) {
            skip_ws();
            if (try_consume("</table>")) break;
            if (try_consume("<thead>")) {
                if (saw_thead) fail("duplicate <thead>");
                if (saw_tbody) fail("<thead> after <tbody>");
                saw_thead = true;
                parse_rows(table.thead(), "</thead>");
            } else if (try_consume("<tbody>")) {
                if (saw_tbody) fail("duplicate <tbody>");
                saw_tbody = true;
                parse_rows(table.tbody(), "</tbody>");
            } else {
                fail("expected <thead>, <tbody> or </table>");
            }
        }
        skip_ws();
        if (pos_ != s_.size()) fail("trailing input after </table>");
        return table;
    }

private:
    void parse_rows(TableTree& section, std::string_view closer) {
        for (;;) {
            skip_ws();
            if (try_consume(closer)) return;
            expect("<tr>");
            TableTree row = TableTree::row();
            for (;;) {
                skip_ws();
                if (try_consume("</tr>")) break;
                row.children.push_back(parse_cell());
            }
            section.children.push_back(std::move(row));
        }
    }

    TableTree parse_cell() {
        expect("<td");
        TableTree cell = TableTree::cell();
        for (;;) {
            if (try_consume(">")) break;
            if (!try_consume(" ")) fail("expected attribute or '>' in <td>");
            bool is_col;
            if (try_consume("colspan=\"")) {
                is_col = true;
            } else if (try_consume("rowspan=\"")) {
                is_col = false;
            } else {
                fail("unknown td attribute");
                return cell;  // unreachable
            }
            int value = parse_span_value();
            expect("\"");
            (is_col ? cell.colspan : cell.rowspan) = value;
        }
        auto end = s_.find("</td>", pos_);
        if (end == std::string_view::npos) fail("unterminated td content");
        cell.content = std::string(s_.substr(pos_, end - pos_));
        pos_ = end + 5;
        return cell;
    }

    int parse_span_value() {
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == start) fail("span attribute needs a numeric value");
        if (pos_ - start > 2) fail("span value out of range");
        int value = 0;
        for (std::size_t i = start; i < pos_; ++i) value = value * 10 + (s_[i] - '0');
        if (value < 1 || value > 10) fail("span value must be in 1..10");
        return value;
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool try_consume(std::string_view token) {
        if (s_.substr(pos_, token.size()) == token) {
            pos_ += token.size();
            return true;
        }
        return false;
    }

    void expect(std::string_view token) {
        if (!try_consume(token)) fail("expected \"" + std::string(token) + "\"");
    }

    [[noreturn]] void fail(const std::string& what) {
        throw Error(ErrorKind::ParseError,
                    what + " at byte " + std::to_string(pos_), static_cast<long>(pos_));
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

} // namespace

std::string to_html(const TableTree& tree) {
    std::string out;
    serialize(tree, out);
    return out;
}

TableTree parse_table_html(std::string_view html) { return Parser(html).parse(); }

int node_count(const TableTree& tree) {
    int n = 1;
    for (const auto& child : tree.children) n += node_count(child);
    return n;
}

} // namespace tabrec

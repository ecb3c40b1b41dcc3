#include "ctxauth/sim/trace.hpp"

#include <array>
#include <charconv>
#include <ostream>
#include <sstream>

namespace ctxauth::sim {

namespace {

constexpr std::array<std::pair<Kind, std::string_view>, 24> kKindNames{{
    {Kind::Inject, "Inject"},
    {Kind::ContextUpdate, "ContextUpdate"},
    {Kind::ObserverAppear, "ObserverAppear"},
    {Kind::ObserverDisappear, "ObserverDisappear"},
    {Kind::Subscribe, "Subscribe"},
    {Kind::SubscribeAck, "SubscribeAck"},
    {Kind::Renew, "Renew"},
    {Kind::Unsubscribe, "Unsubscribe"},
    {Kind::Notify, "Notify"},
    {Kind::Request, "Request"},
    {Kind::Response, "Response"},
    {Kind::AccessDenied, "AccessDenied"},
    {Kind::BroadcastAnnounce, "BroadcastAnnounce"},
    {Kind::RegisterInterest, "RegisterInterest"},
    {Kind::RekeyDistribute, "RekeyDistribute"},
    {Kind::BroadcastCipher, "BroadcastCipher"},
    {Kind::LeaseExpiry, "LeaseExpiry"},
    {Kind::Timer, "Timer"},
    {Kind::Validity, "Validity"},
    {Kind::Transition, "Transition"},
    {Kind::Send, "Send"},
    {Kind::Rotate, "Rotate"},
    {Kind::Decrypt, "Decrypt"},
    {Kind::Violation, "Violation"},
}};

bool needs_escape(char c) {
    return c == ',' || c == '=' || c == '%' || c == ' ' || c == '\n' || c == '\r' || c == '\t';
}

std::string escape(std::string_view in) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(in.size());
    for (char c : in) {
        if (needs_escape(c)) {
            auto u = static_cast<unsigned char>(c);
            out.push_back('%');
            out.push_back(hex[u >> 4]);
            out.push_back(hex[u & 0xF]);
        } else {
            out.push_back(c);
        }
    }
    return out;
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

std::string unescape(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] == '%') {
            if (i + 2 >= in.size()) throw TraceParseError("truncated escape in detail value");
            int hi = hex_value(in[i + 1]);
            int lo = hex_value(in[i + 2]);
            if (hi < 0 || lo < 0) throw TraceParseError("bad escape in detail value");
            out.push_back(static_cast<char>(hi * 16 + lo));
            i += 2;
        } else {
            out.push_back(in[i]);
        }
    }
    return out;
}

std::int64_t parse_int(std::string_view text, const char* what) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw TraceParseError(std::string("bad integer for ") + what + ": '" + std::string(text) + "'");
    }
    return v;
}

// Splits "name=value" and checks the name.
std::string_view field(std::string_view token, std::string_view name) {
    if (token.size() < name.size() + 1 || token.substr(0, name.size()) != name || token[name.size()] != '=') {
        throw TraceParseError("expected field '" + std::string(name) + "' got '" + std::string(token) + "'");
    }
    return token.substr(name.size() + 1);
}

} // namespace

std::string_view to_string(Kind kind) noexcept {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    return "Unknown";
}

std::optional<Kind> parse_kind(std::string_view text) noexcept {
    for (const auto& [k, name] : kKindNames) {
        if (name == text) return k;
    }
    return std::nullopt;
}

bool is_annotation(Kind kind) noexcept {
    return kind >= Kind::Validity;
}

Detail::Detail(std::initializer_list<std::pair<std::string, std::string>> items) : items_(items) {}

Detail& Detail::add(std::string key, std::string value) {
    items_.emplace_back(std::move(key), std::move(value));
    return *this;
}

Detail& Detail::add(std::string key, std::int64_t value) {
    return add(std::move(key), std::to_string(value));
}

std::optional<std::string_view> Detail::get(std::string_view key) const {
    for (const auto& [k, v] : items_) {
        if (k == key) return std::string_view(v);
    }
    return std::nullopt;
}

std::string Detail::at(std::string_view key) const {
    auto v = get(key);
    if (!v) throw TraceParseError("detail has no key '" + std::string(key) + "'");
    return std::string(*v);
}

std::int64_t Detail::int_at(std::string_view key) const {
    auto v = get(key);
    if (!v) throw TraceParseError("detail has no key '" + std::string(key) + "'");
    return parse_int(*v, "detail value");
}

std::string Detail::render() const {
    std::string out;
    for (std::size_t i = 0; i < items_.size(); ++i) {
        if (i) out.push_back(',');
        out += escape(items_[i].first);
        out.push_back('=');
        out += escape(items_[i].second);
    }
    return out;
}

Detail Detail::parse(std::string_view text) {
    Detail d;
    if (text.empty()) return d;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        auto item = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        auto eq = item.find('=');
        if (eq == std::string_view::npos) throw TraceParseError("detail item without '=': " + std::string(item));
        d.add(unescape(item.substr(0, eq)), unescape(item.substr(eq + 1)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return d;
}

std::string TraceRecord::to_line() const {
    std::string line = "t=" + std::to_string(t) + " seq=" + std::to_string(seq) + " kind=";
    line += to_string(kind);
    line += " from=" + from + " to=" + to + " detail=" + detail.render();
    return line;
}

TraceRecord TraceRecord::parse_line(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (tokens.size() < 5) {
        auto sp = line.find(' ', pos);
        if (sp == std::string_view::npos) throw TraceParseError("trace line has too few fields");
        tokens.push_back(line.substr(pos, sp - pos));
        pos = sp + 1;
    }
    tokens.push_back(line.substr(pos));

    TraceRecord r;
    r.t = parse_int(field(tokens[0], "t"), "t");
    r.seq = static_cast<std::uint64_t>(parse_int(field(tokens[1], "seq"), "seq"));
    auto kind_text = field(tokens[2], "kind");
    auto kind = parse_kind(kind_text);
    if (!kind) throw TraceParseError("unknown kind '" + std::string(kind_text) + "'");
    r.kind = *kind;
    r.from = std::string(field(tokens[3], "from"));
    r.to = std::string(field(tokens[4], "to"));
    r.detail = Detail::parse(field(tokens[5], "detail"));
    return r;
}

std::string Trace::render() const {
    std::ostringstream os;
    write(os);
    return os.str();
}

void Trace::write(std::ostream& os) const {
    for (const auto& r : records_) os << r.to_line() << '\n';
}

Trace Trace::parse(std::string_view text) {
    Trace trace;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++line_no;
        if (!line.empty()) {
            try {
                trace.append(TraceRecord::parse_line(line));
            } catch (const TraceParseError& e) {
                throw TraceParseError("line " + std::to_string(line_no) + ": " + e.what());
            }
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return trace;
}

Trace Trace::from_records(std::vector<TraceRecord> records) {
    Trace trace;
    trace.records_ = std::move(records);
    return trace;
}

} // namespace ctxauth::sim

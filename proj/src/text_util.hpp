// Small string helpers shared by the text parsers. Internal header.

#pragma once

#include <charconv>
#include <optional>
#include <string_view>
#include <vector>

namespace legodom::detail
{

inline std::string_view trim(std::string_view s)
{
    constexpr std::string_view ws = " \t\r\n";
    const std::size_t b = s.find_first_not_of(ws);
    if (b == std::string_view::npos)
    {
        return {};
    }
    const std::size_t e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::string_view stripComment(std::string_view s)
{
    const std::size_t hash = s.find('#');
    return hash == std::string_view::npos ? s : s.substr(0, hash);
}

inline std::vector<std::string_view> splitLines(std::string_view text)
{
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size())
    {
        const std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos)
        {
            if (start < text.size())
            {
                lines.push_back(text.substr(start));
            }
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

inline std::vector<std::string_view> splitWhitespace(std::string_view s)
{
    std::vector<std::string_view> parts;
    std::size_t i = 0;
    while (i < s.size())
    {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t'))
        {
            ++i;
        }
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t')
        {
            ++i;
        }
        if (i > start)
        {
            parts.push_back(s.substr(start, i - start));
        }
    }
    return parts;
}

inline std::vector<std::string_view> splitChar(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true)
    {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos)
        {
            parts.push_back(s.substr(start));
            break;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

inline std::optional<double> toDouble(std::string_view s)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+')
    {
        s.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    {
        return std::nullopt;
    }
    return value;
}

} // namespace legodom::detail

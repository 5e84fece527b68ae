#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace forage {

enum class Tile : std::uint8_t { Grass, Forest, Scrub, Stone, Water, Player1, Player2 };

inline constexpr int kTileCount = 7;

inline constexpr std::array<Tile, kTileCount> kAllTiles = {
    Tile::Grass, Tile::Forest, Tile::Scrub, Tile::Stone, Tile::Water, Tile::Player1, Tile::Player2};

/// Tiles that may appear in a level at rest (everything except Scrub).
inline constexpr std::array<Tile, 6> kPlaceableTiles = {
    Tile::Grass, Tile::Forest, Tile::Stone, Tile::Water, Tile::Player1, Tile::Player2};

constexpr int tile_index(Tile t) noexcept { return static_cast<int>(t); }

constexpr bool is_player(Tile t) noexcept { return t == Tile::Player1 || t == Tile::Player2; }

/// Agents may stand on everything except Stone and Water.
constexpr bool is_passable(Tile t) noexcept { return t != Tile::Stone && t != Tile::Water; }

constexpr char tile_char(Tile t) noexcept
{
    switch (t) {
    case Tile::Grass: return 'G';
    case Tile::Forest: return 'F';
    case Tile::Scrub: return 'C';
    case Tile::Stone: return 'S';
    case Tile::Water: return 'W';
    case Tile::Player1: return '1';
    case Tile::Player2: return '2';
    }
    return '?';
}

inline Tile tile_from_char(char c)
{
    switch (c) {
    case 'G': return Tile::Grass;
    case 'F': return Tile::Forest;
    case 'C': return Tile::Scrub;
    case 'S': return Tile::Stone;
    case 'W': return Tile::Water;
    case '1': return Tile::Player1;
    case '2': return Tile::Player2;
    default: break;
    }
    throw InvalidArgument(std::string("unknown tile character '") + c + "'");
}

constexpr std::string_view tile_name(Tile t) noexcept
{
    switch (t) {
    case Tile::Grass: return "grass";
    case Tile::Forest: return "forest";
    case Tile::Scrub: return "scrub";
    case Tile::Stone: return "stone";
    case Tile::Water: return "water";
    case Tile::Player1: return "player1";
    case Tile::Player2: return "player2";
    }
    return "?";
}

struct Position {
    int row = 0;
    int col = 0;

    friend constexpr bool operator==(const Position&, const Position&) = default;
    friend constexpr auto operator<=>(const Position&, const Position&) = default;
};

using TileHistogram = std::array<int, kTileCount>;

/// Rectangular tile grid, row-major. A plain value type: copies are independent.
class Level {
public:
    static constexpr int kDefaultSize = 6;

    Level() : Level(kDefaultSize, kDefaultSize) {}

    Level(int width, int height, Tile fill = Tile::Grass, bool distinguish_players = true)
        : width_(width), height_(height), distinguish_players_(distinguish_players)
    {
        if (width <= 0 || height <= 0)
            throw InvalidArgument("level dimensions must be positive");
        cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int size() const noexcept { return width_ * height_; }
    bool distinguish_players() const noexcept { return distinguish_players_; }
    void set_distinguish_players(bool on) noexcept { distinguish_players_ = on; }

    bool in_bounds(Position p) const noexcept
    {
        return p.row >= 0 && p.row < height_ && p.col >= 0 && p.col < width_;
    }

    int flat(Position p) const noexcept { return p.row * width_ + p.col; }
    Position position(int flat_index) const noexcept { return {flat_index / width_, flat_index % width_}; }

    Tile at(Position p) const
    {
        check(p);
        return cells_[static_cast<std::size_t>(flat(p))];
    }
    Tile operator[](int flat_index) const noexcept { return cells_[static_cast<std::size_t>(flat_index)]; }

    void set(Position p, Tile t)
    {
        check(p);
        cells_[static_cast<std::size_t>(flat(p))] = t;
    }

    const std::vector<Tile>& cells() const noexcept { return cells_; }

    int count(Tile t) const noexcept
    {
        int n = 0;
        for (Tile c : cells_)
            n += (c == t);
        return n;
    }

    /// Content equality; the observation-mode flag is not part of a level's identity.
    friend bool operator==(const Level& a, const Level& b) noexcept
    {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.cells_ == b.cells_;
    }

private:
    void check(Position p) const
    {
        if (!in_bounds(p))
            throw InvalidArgument("position (" + std::to_string(p.row) + "," + std::to_string(p.col) +
                                  ") out of bounds");
    }

    int width_;
    int height_;
    bool distinguish_players_;
    std::vector<Tile> cells_;
};

inline Level parse_level(std::string_view text)
{
    std::vector<std::string_view> rows;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view row = text.substr(start, end - start);
        if (!row.empty() && row.back() == '\r')
            row.remove_suffix(1);
        rows.push_back(row);
        start = end + 1;
    }
    // A single trailing newline is tolerated.
    if (rows.size() > 1 && rows.back().empty())
        rows.pop_back();
    if (rows.empty() || rows.front().empty())
        throw InvalidArgument("level text has zero dimensions");

    const int width = static_cast<int>(rows.front().size());
    const int height = static_cast<int>(rows.size());
    Level level(width, height);
    for (int r = 0; r < height; ++r) {
        if (static_cast<int>(rows[static_cast<std::size_t>(r)].size()) != width)
            throw InvalidArgument("ragged level text: row " + std::to_string(r) + " has length " +
                                  std::to_string(rows[static_cast<std::size_t>(r)].size()) + ", expected " +
                                  std::to_string(width));
        for (int c = 0; c < width; ++c)
            level.set({r, c}, tile_from_char(rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]));
    }
    return level;
}

/// Rows joined by '\n', no trailing newline.
inline std::string serialize_level(const Level& level)
{
    std::string out;
    out.reserve(static_cast<std::size_t>(level.size() + level.height()));
    for (int r = 0; r < level.height(); ++r) {
        if (r > 0)
            out.push_back('\n');
        for (int c = 0; c < level.width(); ++c)
            out.push_back(tile_char(level.at({r, c})));
    }
    return out;
}

inline std::vector<std::string> level_rows(const Level& level)
{
    std::vector<std::string> rows;
    for (int r = 0; r < level.height(); ++r) {
        std::string row;
        for (int c = 0; c < level.width(); ++c)
            row.push_back(tile_char(level.at({r, c})));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Level level_from_rows(const std::vector<std::string>& rows)
{
    std::string text;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0)
            text.push_back('\n');
        text += rows[i];
    }
    return parse_level(text);
}

inline Level swap_tiles(const Level& level, Position a, Position b)
{
    if (!level.in_bounds(a) || !level.in_bounds(b))
        throw InvalidArgument("swap position out of bounds");
    if (a == b)
        throw InvalidArgument("swap positions must differ");
    Level out = level;
    out.set(a, level.at(b));
    out.set(b, level.at(a));
    return out;
}

inline TileHistogram tile_histogram(const Level& level)
{
    TileHistogram h{};
    for (Tile t : level.cells())
        ++h[static_cast<std::size_t>(tile_index(t))];
    return h;
}

/// Dense height x width x channels tensor, channel-fastest.
struct ObservationTensor {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> data;

    float at(int row, int col, int channel) const
    {
        return data[static_cast<std::size_t>((row * width + col) * channels + channel)];
    }
    float& at(int row, int col, int channel)
    {
        return data[static_cast<std::size_t>((row * width + col) * channels + channel)];
    }
};

/// Number of tile channels in the one-hot encoding: Grass, Forest, Stone, Water
/// and either one shared player channel (legacy) or one per player.
constexpr int tile_channels(bool distinguish_players) noexcept { return distinguish_players ? 6 : 5; }

/// Channel a tile is written to. Scrub shares the Grass channel: it only
/// exists mid-simulation and is walkable ground without food.
constexpr int tile_channel(Tile t, bool distinguish_players) noexcept
{
    switch (t) {
    case Tile::Grass:
    case Tile::Scrub: return 0;
    case Tile::Forest: return 1;
    case Tile::Stone: return 2;
    case Tile::Water: return 3;
    case Tile::Player1: return 4;
    case Tile::Player2: return distinguish_players ? 5 : 4;
    }
    return 0;
}

/// One-hot encoding with `extra_channels` zeroed trailing channels reserved for
/// the caller (cursor planes).
inline ObservationTensor one_hot(const Level& level, int extra_channels = 0)
{
    const bool distinguish = level.distinguish_players();
    ObservationTensor obs;
    obs.height = level.height();
    obs.width = level.width();
    obs.channels = tile_channels(distinguish) + extra_channels;
    obs.data.assign(static_cast<std::size_t>(obs.height * obs.width * obs.channels), 0.0f);
    for (int r = 0; r < level.height(); ++r)
        for (int c = 0; c < level.width(); ++c)
            obs.at(r, c, tile_channel(level.at({r, c}), distinguish)) = 1.0f;
    return obs;
}

} // namespace forage

// Synthetic scene specification, placement and rendering.

#include "cgvd/harness.hpp"

#include "cgvd/codec.hpp"
#include "cgvd/error.hpp"
#include "cgvd/io.hpp"
#include "cgvd/rle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace cgvd::harness {

namespace {

nlohmann::json rgb_json(Rgb c) { return {c.r, c.g, c.b}; }

Rgb rgb_from(const nlohmann::json& j) {
    return {j.at(0).get<std::uint8_t>(), j.at(1).get<std::uint8_t>(), j.at(2).get<std::uint8_t>()};
}

const char* shape_name(ShapeKind s) {
    switch (s) {
    case ShapeKind::Rectangle: return "rectangle";
    case ShapeKind::Ellipse: return "ellipse";
    case ShapeKind::Utensil: return "utensil";
    }
    return "rectangle";
}

ShapeKind shape_from(const std::string& s) {
    if (s == "rectangle") return ShapeKind::Rectangle;
    if (s == "ellipse") return ShapeKind::Ellipse;
    if (s == "utensil") return ShapeKind::Utensil;
    throw Error(ErrorCode::InvalidConfig, "unknown shape '" + s + "'");
}

const char* background_name(BackgroundKind b) {
    switch (b) {
    case BackgroundKind::Solid: return "solid";
    case BackgroundKind::Gradient: return "gradient";
    case BackgroundKind::Textured: return "textured";
    }
    return "solid";
}

BackgroundKind background_from(const std::string& s) {
    if (s == "solid") return BackgroundKind::Solid;
    if (s == "gradient") return BackgroundKind::Gradient;
    if (s == "textured") return BackgroundKind::Textured;
    throw Error(ErrorCode::InvalidConfig, "unknown background '" + s + "'");
}

// Catalog entry: what an object of a given label looks like.
struct Look {
    ShapeKind shape;
    Rgb color;
    Rgb accent;
    double length;
    double width;
};

Look utensil(Rgb head, Rgb handle, double length = 24, double width = 4) {
    return {ShapeKind::Utensil, head, handle, length, width};
}

Look look_for(const std::string& label) {
    if (label == "spoon") return utensil({205, 205, 212}, {40, 165, 70});
    if (label == "spatula") return utensil({70, 70, 75}, {200, 120, 40}, 24, 5);
    if (label == "fork") return utensil({200, 200, 206}, {30, 30, 30});
    if (label == "knife") return utensil({218, 218, 224}, {35, 35, 35}, 24, 3);
    if (label == "ladle") return utensil({190, 190, 196}, {225, 225, 225}, 22, 5);
    if (label == "whisk") return utensil({212, 212, 218}, {90, 55, 25});
    if (label == "towel") return {ShapeKind::Rectangle, {70, 110, 190}, {}, 24, 18};
    if (label == "can") return {ShapeKind::Ellipse, {200, 40, 40}, {}, 16, 16};
    if (label == "ball") return {ShapeKind::Ellipse, {240, 220, 40}, {}, 14, 14};
    if (label == "block") return {ShapeKind::Rectangle, {40, 90, 200}, {}, 14, 14};
    if (label == "cup") return {ShapeKind::Ellipse, {240, 240, 240}, {}, 18, 15};
    if (label == "banana") return {ShapeKind::Ellipse, {240, 210, 60}, {}, 24, 8};
    if (label == "sponge") return {ShapeKind::Rectangle, {250, 200, 80}, {}, 16, 10};
    return {ShapeKind::Rectangle, {220, 60, 160}, {}, 14, 14};
}

Rgb handle_color(const std::string& attribute) {
    if (attribute == "green handle") return {40, 165, 70};
    if (attribute == "red handle") return {200, 40, 40};
    if (attribute == "blue handle") return {40, 70, 200};
    if (attribute == "yellow handle") return {230, 210, 40};
    if (attribute == "orange handle") return {235, 130, 30};
    if (attribute == "purple handle") return {130, 50, 160};
    return {30, 30, 30};
}

const std::vector<std::string>& semantic_pool() {
    static const std::vector<std::string> pool{"spatula", "fork", "knife", "ladle", "whisk"};
    return pool;
}

const std::vector<std::string>& random_pool() {
    static const std::vector<std::string> pool{"can", "ball", "block", "cup", "banana", "sponge"};
    return pool;
}

const std::vector<std::string>& attribute_pool() {
    static const std::vector<std::string> pool{"red handle", "blue handle", "yellow handle",
                                               "orange handle", "purple handle"};
    return pool;
}

double bounding_radius(const ObjectSpec& o) {
    return 0.5 * std::hypot(o.length, o.shape == ShapeKind::Utensil ? 2.0 * o.width : o.width) + 1.0;
}

bool inside(const ObjectSpec& o, double px, double py) {
    const double dx = px - o.cx, dy = py - o.cy;
    const double c = std::cos(o.angle), s = std::sin(o.angle);
    const double u = dx * c + dy * s;
    const double v = -dx * s + dy * c;
    switch (o.shape) {
    case ShapeKind::Rectangle:
        return std::abs(u) <= o.length / 2 && std::abs(v) <= o.width / 2;
    case ShapeKind::Ellipse: {
        const double a = o.length / 2, b = o.width / 2;
        return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
    }
    case ShapeKind::Utensil:
        break;
    }
    // Handle along -u, head ellipse at +u.
    const double half = o.length / 2;
    const double head_rx = 0.25 * o.length;
    const double head_cx = half - head_rx;
    const double hu = (u - head_cx) / head_rx, hv = v / o.width;
    return hu * hu + hv * hv <= 1.0 || (u >= -half && u <= head_cx && std::abs(v) <= 1.5);
}

// Colour of an object pixel: utensil handles use the accent.
Rgb shade(const ObjectSpec& o, double px, double py) {
    if (o.shape != ShapeKind::Utensil) {
        return o.color;
    }
    const double dx = px - o.cx, dy = py - o.cy;
    const double u = dx * std::cos(o.angle) + dy * std::sin(o.angle);
    return u < o.length / 2 - 2 * 0.25 * o.length + 1.0 ? o.accent : o.color;
}

BinaryMask robot_mask_at(const SceneSpec& spec, double ex, double ey) {
    BinaryMask m(spec.canvas);
    const double bx = spec.robot.base_x, by = -10.0;
    const double r = spec.robot.thickness / 2.0;
    const double vx = ex - bx, vy = ey - by;
    const double len2 = vx * vx + vy * vy;
    for (int y = 0; y < spec.canvas.height; ++y) {
        for (int x = 0; x < spec.canvas.width; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            double t = len2 > 0 ? ((px - bx) * vx + (py - by) * vy) / len2 : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            const double qx = bx + t * vx - px, qy = by + t * vy - py;
            const bool arm = qx * qx + qy * qy <= r * r;
            const bool gripper = std::abs(px - ex) <= 7.0 && std::abs(py - ey) <= 3.0;
            if (arm || gripper) {
                m.set(x, y);
            }
        }
    }
    return m;
}

std::pair<double, double> path_point(const std::vector<std::pair<double, double>>& pts, double s) {
    if (pts.size() == 1) {
        return pts.front();
    }
    std::vector<double> seg;
    double total = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        seg.push_back(std::hypot(pts[i].first - pts[i - 1].first, pts[i].second - pts[i - 1].second));
        total += seg.back();
    }
    double want = std::clamp(s, 0.0, 1.0) * total;
    for (std::size_t i = 0; i < seg.size(); ++i) {
        if (want <= seg[i] || i + 1 == seg.size()) {
            const double f = seg[i] > 0 ? std::min(want / seg[i], 1.0) : 0.0;
            return {pts[i].first + f * (pts[i + 1].first - pts[i].first),
                    pts[i].second + f * (pts[i + 1].second - pts[i].second)};
        }
        want -= seg[i];
    }
    return pts.back();
}

Image render_background(const SceneSpec& spec) {
    Image img(spec.canvas, spec.background_a);
    if (spec.background == BackgroundKind::Solid) {
        return img;
    }
    std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_int_distribution<int> noise(-spec.noise_amplitude, spec.noise_amplitude);
    const double span = std::max(1, spec.canvas.width + spec.canvas.height - 2);
    for (int y = 0; y < spec.canvas.height; ++y) {
        for (int x = 0; x < spec.canvas.width; ++x) {
            const double t = (x + y) / span;
            const int n = spec.background == BackgroundKind::Textured ? noise(rng) : 0;
            auto mix = [&](std::uint8_t a, std::uint8_t b) {
                const double v = a + (double(b) - a) * t + n;
                return std::uint8_t(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
            };
            img.set(x, y,
                    {mix(spec.background_a.r, spec.background_b.r),
                     mix(spec.background_a.g, spec.background_b.g),
                     mix(spec.background_a.b, spec.background_b.b)});
        }
    }
    return img;
}

ObjectSpec make_object(const std::string& id, const std::string& role, const std::string& label,
                       const std::string& attribute) {
    const Look look = look_for(label);
    ObjectSpec o;
    o.id = id;
    o.role = role;
    o.label = label;
    o.attribute = attribute;
    o.shape = look.shape;
    o.color = look.color;
    o.accent = attribute.empty() ? look.accent : handle_color(attribute);
    o.length = look.length;
    o.width = look.width;
    return o;
}

} // namespace

std::string to_string(DistractorKind k) {
    switch (k) {
    case DistractorKind::Semantic: return "semantic";
    case DistractorKind::Random: return "random";
    case DistractorKind::Attribute: return "attribute";
    }
    return "semantic";
}

DistractorKind distractor_kind_from(const std::string& s) {
    if (s == "semantic") return DistractorKind::Semantic;
    if (s == "random") return DistractorKind::Random;
    if (s == "attribute") return DistractorKind::Attribute;
    throw Error(ErrorCode::InvalidConfig, "unknown distractor taxonomy '" + s + "'");
}

std::string ObjectSpec::phrase() const {
    return attribute.empty() ? label : label + " with " + attribute;
}

DistractorLexicon default_lexicon() {
    return DistractorLexicon({
        {"kitchen", {"spatula", "fork", "knife", "spoon"}},
        {"utensils_semantic", {"spatula", "fork", "knife", "ladle", "whisk", "spoon"}},
        {"random_clutter", {"can", "ball", "block", "cup", "banana", "sponge"}},
        {"spoon_attributes",
         {"spoon with red handle", "spoon with blue handle", "spoon with yellow handle",
          "spoon with orange handle", "spoon with purple handle", "spoon with green handle"}},
    });
}

std::string domain_for(DistractorKind kind) {
    switch (kind) {
    case DistractorKind::Semantic: return "utensils_semantic";
    case DistractorKind::Random: return "random_clutter";
    case DistractorKind::Attribute: return "spoon_attributes";
    }
    return "utensils_semantic";
}

nlohmann::json SceneSpec::to_json() const {
    nlohmann::json objs = nlohmann::json::array();
    for (const auto& o : objects) {
        objs.push_back({{"id", o.id},
                        {"role", o.role},
                        {"label", o.label},
                        {"attribute", o.attribute},
                        {"shape", shape_name(o.shape)},
                        {"color", rgb_json(o.color)},
                        {"accent", rgb_json(o.accent)},
                        {"pose", {{"cx", o.cx}, {"cy", o.cy}, {"angle", o.angle}}},
                        {"length", o.length},
                        {"width", o.width}});
    }
    nlohmann::json waypoints = nlohmann::json::array();
    for (const auto& [x, y] : robot.waypoints) {
        waypoints.push_back({x, y});
    }
    return {{"seed", seed},
            {"canvas", {canvas.width, canvas.height}},
            {"frames", frames},
            {"background",
             {{"kind", background_name(background)},
              {"a", rgb_json(background_a)},
              {"b", rgb_json(background_b)},
              {"noise", noise_amplitude}}},
            {"objects", objs},
            {"robot",
             {{"base_x", robot.base_x},
              {"waypoints", waypoints},
              {"thickness", robot.thickness},
              {"color", rgb_json(robot.color)}}},
            {"confusion", confusion.to_json()},
            {"instruction", instruction},
            {"domain", domain},
            {"taxonomy", to_string(taxonomy)}};
}

SceneSpec SceneSpec::from_json(const nlohmann::json& j) {
    try {
        SceneSpec s;
        s.seed = j.at("seed").get<std::uint64_t>();
        s.canvas = {j.at("canvas").at(0).get<int>(), j.at("canvas").at(1).get<int>()};
        s.frames = j.at("frames").get<int>();
        const auto& bg = j.at("background");
        s.background = background_from(bg.at("kind").get<std::string>());
        s.background_a = rgb_from(bg.at("a"));
        s.background_b = rgb_from(bg.at("b"));
        s.noise_amplitude = bg.at("noise").get<int>();
        for (const auto& o : j.at("objects")) {
            ObjectSpec obj;
            obj.id = o.at("id").get<std::string>();
            obj.role = o.at("role").get<std::string>();
            obj.label = o.at("label").get<std::string>();
            obj.attribute = o.value("attribute", "");
            obj.shape = shape_from(o.at("shape").get<std::string>());
            obj.color = rgb_from(o.at("color"));
            obj.accent = rgb_from(o.at("accent"));
            obj.cx = o.at("pose").at("cx").get<double>();
            obj.cy = o.at("pose").at("cy").get<double>();
            obj.angle = o.at("pose").at("angle").get<double>();
            obj.length = o.at("length").get<double>();
            obj.width = o.at("width").get<double>();
            s.objects.push_back(std::move(obj));
        }
        const auto& r = j.at("robot");
        s.robot.base_x = r.at("base_x").get<double>();
        for (const auto& p : r.at("waypoints")) {
            s.robot.waypoints.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        }
        s.robot.thickness = r.at("thickness").get<int>();
        s.robot.color = rgb_from(r.at("color"));
        s.confusion = ConfusionModel::from_json(j.at("confusion"));
        s.instruction = j.at("instruction").get<std::string>();
        s.domain = j.at("domain").get<std::string>();
        s.taxonomy = distractor_kind_from(j.at("taxonomy").get<std::string>());
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("scene.json: ") + e.what());
    }
}

SceneSpec make_scenario(const ScenarioConfig& cfg) {
    if (cfg.distractors < 0 || cfg.frames < 1) {
        throw Error(ErrorCode::InvalidConfig, "distractor count and frames must be non-negative");
    }
    SceneSpec spec;
    spec.seed = cfg.seed;
    spec.canvas = cfg.canvas;
    spec.frames = cfg.frames;
    spec.taxonomy = cfg.taxonomy;
    spec.domain = domain_for(cfg.taxonomy);
    spec.background_a = {165, 135, 100};
    spec.background_b = {95, 75, 60};

    std::mt19937_64 rng(fnv1a(to_string(cfg.taxonomy), cfg.seed * 0x9e3779b97f4a7c15ull + 1));

    const bool attribute = cfg.taxonomy == DistractorKind::Attribute;
    spec.objects.push_back(make_object("target", "target", "spoon", attribute ? "green handle" : ""));
    spec.objects.push_back(make_object("anchor", "anchor", "towel", ""));
    for (int k = 0; k < cfg.distractors; ++k) {
        char id[16];
        std::snprintf(id, sizeof id, "d%02d", k);
        switch (cfg.taxonomy) {
        case DistractorKind::Semantic: {
            const auto& pool = semantic_pool();
            spec.objects.push_back(make_object(id, "distractor", pool[rng() % pool.size()], ""));
            break;
        }
        case DistractorKind::Random: {
            const auto& pool = random_pool();
            spec.objects.push_back(make_object(id, "distractor", pool[rng() % pool.size()], ""));
            break;
        }
        case DistractorKind::Attribute: {
            const auto& pool = attribute_pool();
            spec.objects.push_back(make_object(id, "distractor", "spoon", pool[rng() % pool.size()]));
            break;
        }
        }
    }
    spec.instruction = attribute ? "put spoon with green handle on towel" : "put spoon on towel";

    // Collision-aware grid placement below the robot's home band.
    const int cols = cfg.canvas.width / cfg.cell;
    const int rows = (cfg.canvas.height - cfg.home_band) / cfg.cell;
    if (cols <= 0 || rows <= 0 || std::size_t(cols * rows) < spec.objects.size()) {
        throw Error(ErrorCode::PlacementInfeasible,
                    std::to_string(spec.objects.size()) + " objects exceed " +
                        std::to_string(std::max(0, cols * rows)) + " grid cells");
    }
    std::vector<int> cells(std::size_t(cols * rows));
    for (int i = 0; i < cols * rows; ++i) cells[std::size_t(i)] = i;
    std::shuffle(cells.begin(), cells.end(), rng);
    const double x0 = (cfg.canvas.width - cols * cfg.cell) / 2.0;
    const double y0 = cfg.home_band + (cfg.canvas.height - cfg.home_band - rows * cfg.cell) / 2.0;
    constexpr double kMargin = 5.0;
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
        auto& o = spec.objects[i];
        const int cell = cells[i];
        const double ccx = x0 + (cell % cols + 0.5) * cfg.cell;
        const double ccy = y0 + (cell / cols + 0.5) * cfg.cell;
        // Rotation is a multiple of 45 degrees; towels stay axis-aligned.
        o.angle = o.role == "anchor" ? 0.0 : double(rng() % 8) * std::numbers::pi / 4.0;
        const double slack = std::max(0.0, cfg.cell / 2.0 - bounding_radius(o) - kMargin);
        o.cx = ccx + slack * unit(rng);
        o.cy = ccy + slack * unit(rng);
    }

    // Home in the band, then over the first distractor, the target, the anchor.
    spec.robot.base_x = cfg.canvas.width / 2.0;
    spec.robot.waypoints.push_back({spec.robot.base_x, 22.0});
    if (cfg.distractors > 0) {
        spec.robot.waypoints.push_back({spec.objects[2].cx, spec.objects[2].cy});
    }
    spec.robot.waypoints.push_back({spec.objects[0].cx, spec.objects[0].cy});
    spec.robot.waypoints.push_back({spec.objects[1].cx, spec.objects[1].cy});

    // Mock detector behaviour.
    std::vector<ConfusionRule> rules;
    const std::string target = spec.objects[0].phrase();
    rules.push_back({target, target, true, {attribute ? 0.85 : 0.8, 0.05}});
    rules.push_back({"robot", "robot", true, {0.95, 0.0}});
    if (cfg.taxonomy == DistractorKind::Semantic) {
        for (const auto& label : semantic_pool()) {
            rules.push_back({label, "spoon", true, {0.6, 0.1}});
        }
        rules.push_back({"spoon", "fork", true, {0.3, 0.05}});
    } else if (attribute) {
        for (const auto& attr : attribute_pool()) {
            const std::string other = "spoon with " + attr;
            rules.push_back({other, target, true, {0.35, 0.05}});
            rules.push_back({target, other, true, {0.3, 0.05}});
        }
    }
    spec.confusion = ConfusionModel(std::move(rules), ConfidenceDist{0.9, 0.03});
    return spec;
}

SceneSpec worked_example_scene() {
    SceneSpec spec;
    spec.seed = 7;
    spec.canvas = {128, 128};
    spec.frames = 4;
    spec.background = BackgroundKind::Gradient;
    spec.background_a = {165, 135, 100};
    spec.background_b = {95, 75, 60};
    spec.taxonomy = DistractorKind::Semantic;
    spec.domain = "kitchen";
    spec.instruction = "put spoon on towel";

    auto spoon = make_object("target", "target", "spoon", "");
    spoon.cx = 34;
    spoon.cy = 70;
    auto spatula = make_object("d00", "distractor", "spatula", "");
    spatula.cx = 94;
    spatula.cy = 70;
    spatula.angle = std::numbers::pi / 2;
    auto towel = make_object("anchor", "anchor", "towel", "");
    towel.cx = 64;
    towel.cy = 108;
    spec.objects = {spoon, towel, spatula};

    spec.robot.base_x = 64;
    spec.robot.waypoints = {{64, 20}, {94, 70}, {34, 70}, {64, 108}};

    spec.confusion = ConfusionModel(
        {
            {"spoon", "spoon", true, {0.8, 0.0}},
            {"spatula", "spoon", true, {0.6, 0.0}},
            {"spatula", "spatula", true, {0.9, 0.0}},
            {"towel", "towel", true, {0.9, 0.0}},
            {"robot", "robot", true, {0.95, 0.0}},
        },
        std::nullopt);
    return spec;
}

GeneratedScene generate_scene(const SceneSpec& spec) {
    if (spec.canvas.empty() || spec.frames < 1 || spec.robot.waypoints.empty()) {
        throw Error(ErrorCode::InvalidConfig, "scene needs a canvas, frames and a robot path");
    }
    GeneratedScene scene;
    scene.spec = spec;
    scene.background = render_background(spec);

    // Footprints and per-pixel ownership; later objects never overwrite earlier ones.
    const Extent e = spec.canvas;
    std::vector<int> owner(std::size_t(e.area()), -1);
    Image objects_layer = scene.background;
    for (std::size_t k = 0; k < spec.objects.size(); ++k) {
        const auto& o = spec.objects[k];
        BinaryMask fp(e);
        const double r = bounding_radius(o) + 1;
        const int xa = std::max(0, int(o.cx - r)), xb = std::min(e.width - 1, int(o.cx + r));
        const int ya = std::max(0, int(o.cy - r)), yb = std::min(e.height - 1, int(o.cy + r));
        for (int y = ya; y <= yb; ++y) {
            for (int x = xa; x <= xb; ++x) {
                if (!inside(o, x + 0.5, y + 0.5)) continue;
                const std::size_t i = std::size_t(y) * e.width + x;
                if (owner[i] >= 0) {
                    throw Error(ErrorCode::PlacementInfeasible,
                                "objects '" + spec.objects[std::size_t(owner[i])].id + "' and '" +
                                    o.id + "' overlap");
                }
                owner[i] = int(k);
                fp.set(x, y);
                objects_layer.set(x, y, shade(o, x + 0.5, y + 0.5));
            }
        }
        scene.footprints.push_back(std::move(fp));
    }

    for (int t = 0; t < spec.frames; ++t) {
        const double s = spec.frames > 1 ? double(t) / (spec.frames - 1) : 0.0;
        auto [ex, ey] = t == 0 ? spec.robot.waypoints.front() : path_point(spec.robot.waypoints, s);
        BinaryMask robot = robot_mask_at(spec, ex, ey);
        Image frame = objects_layer;
        std::vector<BinaryMask> visible;
        for (const auto& fp : scene.footprints) {
            visible.push_back(subtract(fp, robot));
        }
        for (int y = 0; y < e.height; ++y) {
            for (int x = 0; x < e.width; ++x) {
                if (robot.get(x, y)) frame.set(x, y, spec.robot.color);
            }
        }
        scene.frames.push_back(std::move(frame));
        scene.robot_masks.push_back(std::move(robot));
        scene.visible.push_back(std::move(visible));
    }
    return scene;
}

MockScene GeneratedScene::mock_scene() const {
    MockScene m;
    m.extent = spec.canvas;
    m.seed = spec.seed;
    m.confusion = spec.confusion;
    for (std::size_t k = 0; k < spec.objects.size(); ++k) {
        m.objects.push_back({spec.objects[k].id, spec.objects[k].phrase(), visible[0][k]});
    }
    m.objects.push_back({"robot", std::string(kRobotConcept), robot_masks[0]});
    return m;
}

std::string GeneratedScene::hash() const {
    std::string all;
    for (const auto& f : frames) {
        all += image_digest(f);
    }
    return sha256_hex(all);
}

std::vector<std::size_t> GeneratedScene::indices_with_role(const std::string& role) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < spec.objects.size(); ++k) {
        if (spec.objects[k].role == role) out.push_back(k);
    }
    return out;
}

namespace {

std::string frame_name(std::size_t t) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04zu", t);
    return buf;
}

} // namespace

void write_bundle(const std::filesystem::path& dir, const GeneratedScene& scene) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "frames");
    fs::create_directories(dir / "gt");
    write_text_atomic(dir / "scene.json", scene.spec.to_json().dump(2) + "\n");
    for (std::size_t t = 0; t < scene.frames.size(); ++t) {
        const auto n = frame_name(t);
        write_file_atomic(dir / "frames" / (n + ".png"), encode_png(scene.frames[t]));
        write_text_atomic(dir / "gt" / ("robot_" + n + ".rle.json"),
                          mask_to_json(scene.robot_masks[t]).dump() + "\n");
        for (std::size_t k = 0; k < scene.spec.objects.size(); ++k) {
            write_text_atomic(dir / "gt" / (scene.spec.objects[k].id + "_" + n + ".rle.json"),
                              mask_to_json(scene.visible[t][k]).dump() + "\n");
        }
    }
}

FrameStream read_frame_stream(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    FrameStream stream;
    const fs::path frames_dir = fs::exists(dir / "frames") ? dir / "frames" : dir;
    std::vector<fs::path> pngs;
    if (fs::is_directory(frames_dir)) {
        for (const auto& entry : fs::directory_iterator(frames_dir)) {
            if (entry.path().extension() == ".png") pngs.push_back(entry.path());
        }
    }
    std::sort(pngs.begin(), pngs.end());
    if (pngs.empty()) {
        throw Error(ErrorCode::InvalidConfig, "no frames found in " + dir.string());
    }
    for (const auto& p : pngs) {
        stream.frames.push_back(read_png(p));
        const auto stem = p.stem().string();
        const fs::path sidecars[] = {dir / "gt" / ("robot_" + stem + ".rle.json"),
                                     dir / "robot" / (stem + ".rle.json")};
        auto it = std::find_if(std::begin(sidecars), std::end(sidecars),
                               [](const fs::path& s) { return fs::exists(s); });
        stream.robot_masks.push_back(it != std::end(sidecars) ? read_mask(*it)
                                                              : BinaryMask(stream.frames.back().extent()));
        require_same_extent(stream.robot_masks.back().extent(), stream.frames.back().extent(),
                            "robot sidecar vs frame");
        require_same_extent(stream.frames.back().extent(), stream.frames.front().extent(),
                            "frame stream");
    }
    if (fs::exists(dir / "scene.json")) {
        stream.spec = SceneSpec::from_json(nlohmann::json::parse(read_text(dir / "scene.json")));
        for (const auto& o : stream.spec->objects) {
            const auto gt = dir / "gt" / (o.id + "_0000.rle.json");
            if (fs::exists(gt)) stream.gt_t0[o.id] = read_mask(gt);
        }
    }
    return stream;
}

MockScene mock_scene_from(const FrameStream& stream) {
    if (!stream.spec) {
        throw Error(ErrorCode::InvalidConfig, "mock backend needs scene.json with object ground truth");
    }
    MockScene m;
    m.extent = stream.frames.front().extent();
    m.seed = stream.spec->seed;
    m.confusion = stream.spec->confusion;
    for (const auto& o : stream.spec->objects) {
        auto it = stream.gt_t0.find(o.id);
        if (it == stream.gt_t0.end()) {
            throw Error(ErrorCode::InvalidConfig, "missing t=0 ground truth for '" + o.id + "'");
        }
        m.objects.push_back({o.id, o.phrase(), it->second});
    }
    m.objects.push_back({"robot", std::string(kRobotConcept), stream.robot_masks.front()});
    return m;
}

} // namespace cgvd::harness

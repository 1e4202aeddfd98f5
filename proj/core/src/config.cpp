#include "pairpol/config.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <limits>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pairpol/analysis.hpp"
#include "pairpol/errors.hpp"

namespace pairpol {
namespace {

using nlohmann::json;

//---------------------------------------------------------------------------//
// TOML-style reader producing a nested JSON object
//---------------------------------------------------------------------------//
class TomlReader
{
  public:
    explicit TomlReader(std::string_view text) : text_(text) {}

    json read()
    {
        json root = json::object();
        json* table = &root;
        std::set<std::string> seen_tables;
        std::size_t pos = 0;
        while (pos <= text_.size())
        {
            std::size_t const end = std::min(text_.find('\n', pos), text_.size());
            ++line_;
            line_text_ = text_.substr(pos, end - pos);
            col_ = 0;
            this->parse_line(root, table, seen_tables);
            pos = end + 1;
        }
        return root;
    }

  private:
    [[noreturn]] void fail(std::string const& what) const
    {
        throw ConfigError("line " + std::to_string(line_) + ": " + what);
    }

    void skip_space()
    {
        while (col_ < line_text_.size()
               && (line_text_[col_] == ' ' || line_text_[col_] == '\t'
                   || line_text_[col_] == '\r'))
            ++col_;
    }

    bool at_end_or_comment()
    {
        this->skip_space();
        return col_ >= line_text_.size() || line_text_[col_] == '#';
    }

    std::string bare_key()
    {
        std::size_t const start = col_;
        while (col_ < line_text_.size()
               && (std::isalnum(static_cast<unsigned char>(line_text_[col_]))
                   || line_text_[col_] == '_' || line_text_[col_] == '-'
                   || line_text_[col_] == '.'))
            ++col_;
        if (col_ == start)
            this->fail("expected a key");
        return std::string(line_text_.substr(start, col_ - start));
    }

    void parse_line(json& root, json*& table, std::set<std::string>& seen)
    {
        if (this->at_end_or_comment())
            return;
        if (line_text_[col_] == '[')
        {
            ++col_;
            this->skip_space();
            std::string const name = this->bare_key();
            this->skip_space();
            if (col_ >= line_text_.size() || line_text_[col_] != ']')
                this->fail("expected ']' after table name");
            ++col_;
            if (!this->at_end_or_comment())
                this->fail("unexpected text after table header");
            if (!seen.insert(name).second)
                this->fail("table [" + name + "] defined twice");
            table = &root;
            std::string_view rest = name;
            while (!rest.empty())
            {
                auto const dot = rest.find('.');
                std::string part(rest.substr(0, dot));
                if (part.empty())
                    this->fail("empty table name component");
                json& child = (*table)[part];
                if (child.is_null())
                    child = json::object();
                else if (!child.is_object())
                    this->fail("'" + part + "' is not a table");
                table = &child;
                rest = dot == std::string_view::npos ? std::string_view{}
                                                     : rest.substr(dot + 1);
            }
            return;
        }

        std::string const key = this->bare_key();
        if (key.find('.') != std::string::npos)
            this->fail("dotted keys are not supported: '" + key + "'");
        this->skip_space();
        if (col_ >= line_text_.size() || line_text_[col_] != '=')
            this->fail("expected '=' after key '" + key + "'");
        ++col_;
        json value = this->value();
        if (!this->at_end_or_comment())
            this->fail("unexpected text after value of '" + key + "'");
        if (table->contains(key))
            this->fail("duplicate key '" + key + "'");
        (*table)[key] = std::move(value);
    }

    json value()
    {
        this->skip_space();
        if (col_ >= line_text_.size())
            this->fail("missing value");
        char const c = line_text_[col_];
        if (c == '"')
            return this->string_value();
        if (c == '[')
            return this->array_value();
        if (line_text_.substr(col_).starts_with("true"))
        {
            col_ += 4;
            return true;
        }
        if (line_text_.substr(col_).starts_with("false"))
        {
            col_ += 5;
            return false;
        }
        return this->number_value();
    }

    json string_value()
    {
        ++col_;
        std::string out;
        while (true)
        {
            if (col_ >= line_text_.size())
                this->fail("unterminated string");
            char const c = line_text_[col_++];
            if (c == '"')
                return out;
            if (c != '\\')
            {
                out += c;
                continue;
            }
            if (col_ >= line_text_.size())
                this->fail("unterminated escape");
            switch (line_text_[col_++])
            {
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                default: this->fail("unsupported escape in string");
            }
        }
    }

    json array_value()
    {
        ++col_;
        json arr = json::array();
        this->skip_space();
        if (col_ < line_text_.size() && line_text_[col_] == ']')
        {
            ++col_;
            return arr;
        }
        while (true)
        {
            json v = this->value();
            if (v.is_array())
                this->fail("nested arrays are not supported");
            arr.push_back(std::move(v));
            this->skip_space();
            if (col_ >= line_text_.size())
                this->fail("unterminated array");
            char const c = line_text_[col_++];
            if (c == ']')
                return arr;
            if (c != ',')
                this->fail("expected ',' or ']' in array");
        }
    }

    json number_value()
    {
        std::size_t const start = col_;
        while (col_ < line_text_.size()
               && (std::isalnum(static_cast<unsigned char>(line_text_[col_]))
                   || line_text_[col_] == '+' || line_text_[col_] == '-'
                   || line_text_[col_] == '.' || line_text_[col_] == '_'))
            ++col_;
        std::string tok(line_text_.substr(start, col_ - start));
        tok.erase(std::remove(tok.begin(), tok.end(), '_'), tok.end());
        if (tok.empty())
            this->fail("expected a value");
        if (tok.front() == '+')
            tok.erase(0, 1);
        char const* first = tok.data();
        char const* last = tok.data() + tok.size();

        bool const is_float = tok.find_first_of(".eE") != std::string::npos
                              || tok == "inf" || tok == "-inf" || tok == "nan";
        if (!is_float)
        {
            if (tok.front() == '-')
            {
                std::int64_t v{};
                auto res = std::from_chars(first, last, v);
                if (res.ec == std::errc{} && res.ptr == last)
                    return v;
            }
            else
            {
                std::uint64_t v{};
                auto res = std::from_chars(first, last, v);
                if (res.ec == std::errc{} && res.ptr == last)
                    return v;
            }
            this->fail("invalid value '" + tok + "'");
        }
        double v{};
        auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc{} || res.ptr != last)
            this->fail("invalid number '" + tok + "'");
        return v;
    }

    std::string_view text_;
    std::string_view line_text_;
    std::size_t col_{0};
    int line_{0};
};

//---------------------------------------------------------------------------//
// Strict mapping from the JSON tree onto the config structs
//---------------------------------------------------------------------------//
class Mapper
{
  public:
    Mapper(json const& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix))
    {
        if (!obj_.is_object())
            throw ConfigError("'" + this->display() + "' must be a table");
    }

    ~Mapper() = default;
    Mapper(Mapper const&) = delete;
    Mapper& operator=(Mapper const&) = delete;

    void check_unknown() const
    {
        for (auto const& [key, value] : obj_.items())
        {
            if (!used_.count(key))
                throw ConfigError("unknown key '" + prefix_ + key + "'");
        }
    }

    json const* find(std::string const& key)
    {
        used_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    void get(std::string const& key, double& out)
    {
        if (auto const* v = this->find(key))
            out = this->number(*v, key);
    }

    void get(std::string const& key, bool& out)
    {
        if (auto const* v = this->find(key))
        {
            if (!v->is_boolean())
                this->type_error(key, "a boolean");
            out = v->get<bool>();
        }
    }

    void get(std::string const& key, int& out)
    {
        if (auto const* v = this->find(key))
        {
            if (!v->is_number_integer())
                this->type_error(key, "an integer");
            auto const i = v->get<std::int64_t>();
            if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max())
                this->type_error(key, "an integer in range");
            out = static_cast<int>(i);
        }
    }

    void get(std::string const& key, std::uint64_t& out)
    {
        if (auto const* v = this->find(key))
        {
            if (!v->is_number_unsigned())
                this->type_error(key, "a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }

    void get(std::string const& key, std::string& out)
    {
        if (auto const* v = this->find(key))
        {
            if (!v->is_string())
                this->type_error(key, "a string");
            out = v->get<std::string>();
        }
    }

    void get(std::string const& key, std::array<double, 2>& out)
    {
        if (auto const* v = this->find(key))
        {
            if (!v->is_array() || v->size() != 2)
                this->type_error(key, "a two-element array");
            out = {this->number((*v)[0], key), this->number((*v)[1], key)};
        }
    }

    void get(std::string const& key, std::vector<std::string>& out)
    {
        if (auto const* v = this->find(key))
        {
            if (!v->is_array())
                this->type_error(key, "an array of strings");
            out.clear();
            for (auto const& item : *v)
            {
                if (!item.is_string())
                    this->type_error(key, "an array of strings");
                out.push_back(item.get<std::string>());
            }
        }
    }

    void get(std::string const& key, PairModel& out)
    {
        std::string tag;
        if (this->find(key) == nullptr)
            return;
        this->get(key, tag);
        try
        {
            out = PairModel::parse(tag);
        }
        catch (std::invalid_argument const& e)
        {
            throw ConfigError("'" + prefix_ + key + "': " + e.what());
        }
    }

  private:
    std::string display() const
    {
        return prefix_.empty() ? std::string("<root>") : prefix_.substr(0, prefix_.size() - 1);
    }

    [[noreturn]] void type_error(std::string const& key, char const* expected) const
    {
        throw ConfigError("'" + prefix_ + key + "' must be " + expected);
    }

    double number(json const& v, std::string const& key) const
    {
        if (!v.is_number())
            this->type_error(key, "a number");
        return v.get<double>();
    }

    json const& obj_;
    std::string prefix_;
    std::set<std::string> used_;
};

void map_bands(json const& obj, ClassBands& b)
{
    Mapper m(obj, "apparatus.bands.");
    m.get("a_gagg_max", b.a_gagg_max);
    m.get("bc_nai_split", b.bc_nai_split);
    m.get("b_nai_max", b.b_nai_max);
    m.get("c_nai_min", b.c_nai_min);
    m.get("d_gagg", b.d_gagg);
    m.get("d_nai", b.d_nai);
    m.check_unknown();
}

void map_apparatus(json const& obj, ApparatusConfig& a)
{
    Mapper m(obj, "apparatus.");
    m.get("n_counters_per_arm", a.n_counters_per_arm);
    m.get("counter_pitch", a.counter_pitch_deg);
    m.get("theta_window", a.theta_window_deg);
    m.get("plastic_separation", a.plastic_separation_cm);
    m.get("source_offset_toward_gagg_arm", a.source_offset_toward_gagg_arm_cm);
    m.get("gagg_enabled", a.gagg_enabled);
    m.get("gagg_threshold", a.gagg_threshold_kev);
    m.get("gagg_max", a.gagg_max_kev);
    m.get("nai_window", a.nai_window_kev);
    m.get("nai_resolution_fwhm_frac_at_511", a.nai_resolution_fwhm_frac_at_511);
    m.get("gagg_resolution_fwhm_frac_at_170", a.gagg_resolution_fwhm_frac_at_170);
    m.get("plastic_resolution_fwhm_frac_at_511", a.plastic_resolution_fwhm_frac_at_511);
    m.get("point_detector_mode", a.point_detector_mode);
    m.get("gagg_interaction_probability", a.gagg_interaction_probability);
    m.get("backscatter_probability", a.backscatter_probability);
    m.get("backscatter_theta_min", a.backscatter_theta_min_deg);
    if (auto const* bands = m.find("bands"))
        map_bands(*bands, a.bands);
    m.check_unknown();
}

RunConfig map_config(json const& root)
{
    RunConfig c;
    Mapper m(root, "");
    m.get("model", c.model);
    m.get("decoherent_model", c.decoherent_model);
    m.get("backscatter_model", c.backscatter_model);
    m.get("n_events", c.n_events);
    m.get("seed", c.seed);
    m.get("workers", c.workers);
    m.get("selections", c.selections);
    if (auto const* app = m.find("apparatus"))
        map_apparatus(*app, c.apparatus);
    if (auto const* out = m.find("outputs"))
    {
        Mapper o(*out, "outputs.");
        o.get("out_dir", c.outputs.out_dir);
        o.get("listmode", c.outputs.listmode);
        o.check_unknown();
    }
    std::string preset;
    m.get("preset", preset);
    m.check_unknown();
    if (!preset.empty())
        apply_preset(c, preset);
    c.validate();
    return c;
}

//---------------------------------------------------------------------------//
std::string toml_string(std::string_view s)
{
    std::string out = "\"";
    for (char c : s)
    {
        switch (c)
        {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out + "\"";
}

std::string pair_text(std::array<double, 2> const& a)
{
    return "[" + format_double(a[0]) + ", " + format_double(a[1]) + "]";
}

}  // namespace

//---------------------------------------------------------------------------//
std::string format_double(double value)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    std::string s(buf, res.ptr);
    if (std::isfinite(value) && s.find_first_of(".e") == std::string::npos)
        s += ".0";
    return s;
}

void RunConfig::validate() const
{
    apparatus.validate();
    if (n_events < 1)
        throw ConfigError("n_events must be at least 1");
    if (workers < 1)
        throw ConfigError("workers must be at least 1");
    if (selections.empty())
        throw ConfigError("at least one selection is required");
    for (auto const& s : selections)
    {
        try
        {
            Selection::parse(s);
        }
        catch (std::invalid_argument const& e)
        {
            throw ConfigError(e.what());
        }
    }
    if (outputs.out_dir.empty())
        throw ConfigError("outputs.out_dir must not be empty");
    if (preset)
    {
        auto const& names = preset_names();
        if (std::find(names.begin(), names.end(), *preset) == names.end())
            throw ConfigError("unknown preset '" + *preset + "'");
    }
}

ModelSet RunConfig::models() const
{
    return ModelSet{model, decoherent_model, backscatter_model};
}

std::vector<std::string> const& preset_names()
{
    static std::vector<std::string> const names{
        "entangled_baseline",
        "decoherent_all",
        "class_a",
        "class_b",
        "class_c",
        "class_d",
        "s_function_entangled",
        "s_function_class_a",
        "point_82deg",
    };
    return names;
}

void apply_preset(RunConfig& config, std::string_view name)
{
    ApparatusConfig app;
    std::vector<std::string> selections;
    if (name == "entangled_baseline" || name == "s_function_entangled")
    {
        selections = {"entangled"};
    }
    else if (name == "point_82deg")
    {
        app.point_detector_mode = true;
        app.theta_window_deg = {82.0, 82.0};
        selections = {"entangled"};
    }
    else if (name == "decoherent_all")
    {
        app.gagg_enabled = true;
        selections = {"decoherent"};
    }
    else if (name == "class_a" || name == "s_function_class_a")
    {
        app.gagg_enabled = true;
        selections = {"a"};
    }
    else if (name == "class_b" || name == "class_c" || name == "class_d")
    {
        app.gagg_enabled = true;
        selections = {std::string(name.substr(6))};
    }
    else
    {
        throw ConfigError("unknown preset '" + std::string(name) + "'");
    }
    config.model = PairModel::entangled();
    config.decoherent_model = PairModel::mixed_hm();
    config.backscatter_model = PairModel::depolarized(0.2);
    config.apparatus = app;
    config.selections = std::move(selections);
    config.preset = std::string(name);
}

RunConfig parse_config(std::string_view text)
{
    auto const first = text.find_first_not_of(" \t\r\n");
    json root;
    if (first != std::string_view::npos && text[first] == '{')
    {
        try
        {
            root = json::parse(text);
        }
        catch (json::parse_error const& e)
        {
            throw ConfigError(std::string("JSON parse error: ") + e.what());
        }
        if (!root.is_object())
            throw ConfigError("configuration must be an object");
    }
    else
    {
        root = TomlReader(text).read();
    }
    return map_config(root);
}

RunConfig load_config(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string emit_config(RunConfig const& c)
{
    std::ostringstream os;
    auto const& a = c.apparatus;
    if (c.preset)
        os << "preset = " << toml_string(*c.preset) << '\n';
    os << "model = " << toml_string(c.model.tag()) << '\n'
       << "decoherent_model = " << toml_string(c.decoherent_model.tag()) << '\n'
       << "backscatter_model = " << toml_string(c.backscatter_model.tag()) << '\n'
       << "n_events = " << c.n_events << '\n'
       << "seed = " << c.seed << '\n'
       << "workers = " << c.workers << '\n'
       << "selections = [";
    for (std::size_t i = 0; i < c.selections.size(); ++i)
        os << (i ? ", " : "") << toml_string(c.selections[i]);
    os << "]\n\n[apparatus]\n"
       << "n_counters_per_arm = " << a.n_counters_per_arm << '\n'
       << "counter_pitch = " << format_double(a.counter_pitch_deg) << '\n'
       << "theta_window = " << pair_text(a.theta_window_deg) << '\n'
       << "plastic_separation = " << format_double(a.plastic_separation_cm) << '\n'
       << "source_offset_toward_gagg_arm = "
       << format_double(a.source_offset_toward_gagg_arm_cm) << '\n'
       << "gagg_enabled = " << (a.gagg_enabled ? "true" : "false") << '\n'
       << "gagg_threshold = " << format_double(a.gagg_threshold_kev) << '\n'
       << "gagg_max = " << format_double(a.gagg_max_kev) << '\n'
       << "nai_window = " << pair_text(a.nai_window_kev) << '\n'
       << "nai_resolution_fwhm_frac_at_511 = "
       << format_double(a.nai_resolution_fwhm_frac_at_511) << '\n'
       << "gagg_resolution_fwhm_frac_at_170 = "
       << format_double(a.gagg_resolution_fwhm_frac_at_170) << '\n'
       << "plastic_resolution_fwhm_frac_at_511 = "
       << format_double(a.plastic_resolution_fwhm_frac_at_511) << '\n'
       << "point_detector_mode = " << (a.point_detector_mode ? "true" : "false") << '\n'
       << "gagg_interaction_probability = "
       << format_double(a.gagg_interaction_probability) << '\n'
       << "backscatter_probability = " << format_double(a.backscatter_probability) << '\n'
       << "backscatter_theta_min = " << format_double(a.backscatter_theta_min_deg) << '\n'
       << "\n[apparatus.bands]\n"
       << "a_gagg_max = " << format_double(a.bands.a_gagg_max) << '\n'
       << "bc_nai_split = " << format_double(a.bands.bc_nai_split) << '\n'
       << "b_nai_max = " << format_double(a.bands.b_nai_max) << '\n'
       << "c_nai_min = " << format_double(a.bands.c_nai_min) << '\n'
       << "d_gagg = " << pair_text(a.bands.d_gagg) << '\n'
       << "d_nai = " << pair_text(a.bands.d_nai) << '\n'
       << "\n[outputs]\n"
       << "out_dir = " << toml_string(c.outputs.out_dir) << '\n'
       << "listmode = " << (c.outputs.listmode ? "true" : "false") << '\n';
    return os.str();
}

std::string emit_config_json(RunConfig const& config)
{
    return TomlReader(emit_config(config)).read().dump(2);
}

}  // namespace pairpol

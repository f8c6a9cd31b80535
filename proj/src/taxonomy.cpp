#include "tcfd/taxonomy.hpp"

#include <algorithm>
#include <set>

#include "tcfd/error.hpp"

namespace tcfd {

std::string_view to_string(Pillar p) {
  switch (p) {
    case Pillar::Governance: return "Governance";
    case Pillar::Strategy: return "Strategy";
    case Pillar::RiskManagement: return "RiskManagement";
    case Pillar::MetricsTargets: return "MetricsTargets";
    case Pillar::None: return "None";
  }
  return "None";
}

std::string_view to_string(Granularity g) {
  switch (g) {
    case Granularity::General: return "General";
    case Granularity::Category: return "Category";
    case Granularity::Fine: return "Fine";
  }
  return "Fine";
}

Pillar parse_pillar(std::string_view s) {
  for (auto p : {Pillar::Governance, Pillar::Strategy, Pillar::RiskManagement,
                 Pillar::MetricsTargets, Pillar::None}) {
    if (s == to_string(p)) return p;
  }
  throw ParseError("unknown pillar '" + std::string(s) + "'");
}

Granularity parse_granularity(std::string_view s) {
  for (auto g : {Granularity::General, Granularity::Category, Granularity::Fine}) {
    if (s == to_string(g)) return g;
  }
  throw ParseError("unknown granularity '" + std::string(s) + "'");
}

LabelSet::LabelSet(std::vector<Label> labels, std::string version)
    : labels_(std::move(labels)), version_(std::move(version)) {}

std::size_t LabelSet::count(Granularity g) const {
  return static_cast<std::size_t>(std::count_if(
      labels_.begin(), labels_.end(), [g](const Label& l) { return l.granularity == g; }));
}

std::size_t LabelSet::count(Pillar p, Granularity g) const {
  return static_cast<std::size_t>(std::count_if(labels_.begin(), labels_.end(), [&](const Label& l) {
    return l.pillar == p && l.granularity == g;
  }));
}

const Label* LabelSet::find(std::string_view code) const noexcept {
  auto it = std::find_if(labels_.begin(), labels_.end(),
                         [code](const Label& l) { return l.code == code; });
  return it == labels_.end() ? nullptr : &*it;
}

std::optional<std::size_t> LabelSet::index_of(std::string_view code) const noexcept {
  auto it = std::find_if(labels_.begin(), labels_.end(),
                         [code](const Label& l) { return l.code == code; });
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

const Label& LabelSet::lookup(std::string_view code) const {
  if (const Label* l = find(code)) return *l;
  throw ConfigError("unknown label code '" + std::string(code) + "'");
}

LabelSet builtin_taxonomy() {
  using P = Pillar;
  using G = Granularity;
  std::vector<Label> labels = {
      {"GENERAL.GOVERNANCE", P::Governance, G::General, "Governance"},
      {"GENERAL.STRATEGY", P::Strategy, G::General, "Strategy"},
      {"GENERAL.RISK_MANAGEMENT", P::RiskManagement, G::General, "Risk management"},
      {"GENERAL.METRICS_TARGETS", P::MetricsTargets, G::General, "Metrics and targets"},

      {"GO.1", P::Governance, G::Category, "Climate-related Governance"},
      {"GO.1.1", P::Governance, G::Fine,
       "Board's responsibility for overseeing climate-related issues"},
      {"GO.1.2", P::Governance, G::Fine,
       "Executive management's strategic role related to the assessment and management of "
       "climate-related issues"},

      {"ST.1", P::Strategy, G::Category, "Climate-related Strategy"},
      {"ST.1.1", P::Strategy, G::Fine,
       "Climate-related transition risks such as policy, legal, technology, market and "
       "reputation risks emerging from climate change"},
      {"ST.1.2", P::Strategy, G::Fine,
       "Climate-related physical risks such as acute weather events and chronic shifts in "
       "weather patterns"},
      {"ST.1.3", P::Strategy, G::Fine, "Material financial impact of climate-related issues"},
      {"ST.1.4", P::Strategy, G::Fine, "Credit exposure to carbon-related sectors"},
      {"ST.1.5", P::Strategy, G::Fine,
       "Financing and investment for carbon-intensive industries such as fossil fuel industry"},
      {"ST.1.6", P::Strategy, G::Fine,
       "Use of climate-related scenario models to analyse the impact of climate-related risks"},
      {"ST.1.7", P::Strategy, G::Fine,
       "Resilience of the bank's strategy under different climate-related scenarios"},

      {"RM.1", P::RiskManagement, G::Category, "Climate-related Risk Management"},
      {"RM.1.1", P::RiskManagement, G::Fine,
       "Processes to identify, assess and manage climate-related risks and integrate them into "
       "overall risk management"},
      {"RM.1.2", P::RiskManagement, G::Fine,
       "Relationship between climate-related risks and financial risks such as credit risk, "
       "market risk, liquidity risk and operational risk"},

      {"MT.1", P::MetricsTargets, G::Category, "Climate-related metrics and targets"},
      {"MT.1.1", P::MetricsTargets, G::Fine,
       "Carbon footprint, direct and indirect greenhouse gas emissions"},
      {"MT.1.2", P::MetricsTargets, G::Fine,
       "Incorporation of climate-related performance metrics into remuneration policies"},
      {"MT.1.3", P::MetricsTargets, G::Fine, "Emissions reduction and carbon neutrality targets"},

      {std::string(kNoneCode), P::None, G::General,
       "none of the above; text not related to climate or TCFD topics"},
  };
  return LabelSet(std::move(labels), "builtin-tcfd-1");
}

std::string hypothesis_for(const Label& label, std::string_view tmpl) {
  constexpr std::string_view placeholder = "{}";
  const auto first = tmpl.find(placeholder);
  if (first == std::string_view::npos) {
    throw TemplateError("hypothesis template has no '{}' placeholder: \"" + std::string(tmpl) +
                        "\"");
  }
  if (tmpl.find(placeholder, first + placeholder.size()) != std::string_view::npos) {
    throw TemplateError("hypothesis template has more than one '{}' placeholder: \"" +
                        std::string(tmpl) + "\"");
  }
  std::string out;
  out.reserve(tmpl.size() + label.description.size());
  out.append(tmpl.substr(0, first));
  out.append(label.description);
  out.append(tmpl.substr(first + placeholder.size()));
  return out;
}

std::string parent_code(std::string_view code) {
  const auto dot = code.rfind('.');
  if (dot == std::string_view::npos) return {};
  return std::string(code.substr(0, dot));
}

std::vector<ValidationFinding> validate(const LabelSet& set) {
  using Kind = ValidationFinding::Kind;
  std::vector<ValidationFinding> findings;
  std::set<std::string, std::less<>> seen;
  for (const Label& l : set) {
    if (!seen.insert(l.code).second) {
      findings.push_back({Kind::DuplicateCode, l.code, "duplicate label code '" + l.code + "'"});
    }
    if (l.description.find_first_not_of(" \t\r\n") == std::string::npos) {
      findings.push_back({Kind::EmptyDescription, l.code, "label '" + l.code + "' has no description"});
    }
    if (l.granularity == Granularity::Fine) {
      const std::string parent = parent_code(l.code);
      const Label* p = parent.empty() ? nullptr : set.find(parent);
      if (p == nullptr || p->granularity != Granularity::Category || p->pillar != l.pillar) {
        findings.push_back({Kind::OrphanFine, l.code,
                            "fine label '" + l.code + "' has no category parent in pillar " +
                                std::string(to_string(l.pillar))});
      }
    }
  }
  return findings;
}

}  // namespace tcfd

#include "cdef/errors.hpp"
#include "cdef/manifest.hpp"

namespace cdef {

const std::vector<GalleryManifest>& gallery() {
  static const std::vector<GalleryManifest> g = {
      {"psi-invariants", "light-cone identities of Psi on random points",
       R"({
  "name": "psi-invariants",
  "analysis": "lightcone",
  "seed": 7,
  "random_points": {"count": 1000, "N": 4, "scale": 1.0}
})"},
      {"representatives", "C(I(f)) = f, metric(I(f)) and position identities for the closed-form immersions",
       R"({
  "name": "representatives",
  "analysis": "lightcone",
  "round_trip": [
    {"label": "plane", "immersion": {"builtin": "plane", "n": 2, "m": 3},
     "grid": {"lo": [-0.5, -0.5], "hi": [0.5, 0.5], "counts": [3, 3]}},
    {"label": "sphere", "immersion": {"builtin": "sphere", "n": 2, "r": 1.0},
     "grid": {"lo": [-0.4, -0.4], "hi": [0.4, 0.4], "counts": [3, 3]}},
    {"label": "cylinder", "immersion": {"builtin": "cylinder", "n": 2, "r": 1.0},
     "grid": {"lo": [0.2, -0.4], "hi": [1.0, 0.4], "counts": [3, 3]}},
    {"label": "cone-over-sphere", "immersion": {"builtin": "cone-over-sphere", "n": 2},
     "grid": {"lo": [0.5, -0.4], "hi": [1.5, 0.4], "counts": [3, 3]}},
    {"label": "torus", "immersion": {"builtin": "torus", "R": 2.0, "r": 0.5},
     "grid": {"lo": [0.0, 0.0], "hi": [1.0, 1.0], "counts": [3, 3]}},
    {"label": "flat-torus", "immersion": {"builtin": "flat-torus", "a": 1.0, "b": 2.0},
     "grid": {"lo": [-0.3, -0.3], "hi": [0.3, 0.3], "counts": [3, 3]}},
    {"label": "quadric-graph", "immersion": {"builtin": "quadric-graph", "K": [[1.0, 2.0], [0.5, -1.0]]},
     "grid": {"lo": [-0.3, -0.3], "hi": [0.3, 0.3], "counts": [3, 3]}},
    {"label": "rigid-motion", "immersion": {"builtin": "rigid-motion",
       "of": {"builtin": "sphere", "n": 2, "r": 2.0},
       "rotation": [[0.6, -0.8, 0.0], [0.8, 0.6, 0.0], [0.0, 0.0, 1.0]], "translation": [1.0, -2.0, 0.5]},
     "grid": {"lo": [-0.4, -0.4], "hi": [0.4, 0.4], "counts": [3, 3]}},
    {"label": "inverted-cylinder",
     "immersion": {"builtin": "inversion", "of": {"builtin": "cylinder", "n": 2}, "center": [0.2, 0.1, 3.0]},
     "base": {"builtin": "cylinder", "n": 2},
     "grid": {"lo": [0.2, -0.4], "hi": [1.0, 0.4], "counts": [3, 3]}},
    {"label": "inverted-sphere",
     "immersion": {"builtin": "inversion", "of": {"builtin": "sphere", "n": 3}, "center": [0.0, 0.3, 0.1, -2.0]},
     "base": {"builtin": "sphere", "n": 3},
     "grid": {"lo": [-0.3, -0.3, -0.3], "hi": [0.3, 0.3, 0.3], "counts": [2, 2, 2]}}
  ]
})"},
      {"inversion-transfer", "second fundamental form transfer for the cylinder with an inversion",
       R"({
  "name": "inversion-transfer",
  "analysis": "lightcone",
  "transfer": {
    "immersion": {"builtin": "inversion", "of": {"builtin": "cylinder", "n": 2}, "center": [0.2, 0.1, 3.0]},
    "base": {"builtin": "cylinder", "n": 2},
    "grid": {"lo": [0.2, -0.4], "hi": [1.0, 0.4], "counts": [3, 3]},
    "delta": [[0.0, 1.0]]
  }
})"},
      {"sphere-rigidity", "conformal 1-nullity of a round sphere and the rigidity hypotheses",
       R"({
  "name": "sphere-rigidity",
  "analysis": "single",
  "immersion": {"builtin": "sphere", "n": 6},
  "grid": {"center": [0, 0, 0, 0, 0, 0], "radius": 0.2, "counts": [1, 1, 1, 1, 1, 1]},
  "nullity": {"s": [1]},
  "rigidity": {"q": 1},
  "expect": {"nullity": {"1": 6}, "rigidity_hypotheses": false}
})"},
      {"cylinder-nullity", "conformal 1-nullity and rulings of a cylinder",
       R"({
  "name": "cylinder-nullity",
  "analysis": "single",
  "immersion": {"builtin": "cylinder", "n": 3},
  "grid": {"lo": [-0.2, -0.2, -0.2], "hi": [0.2, 0.2, 0.2], "counts": [3, 3, 3]},
  "nullity": {"s": [1]},
  "ruling": {"directions": [[0, 1, 0], [0, 0, 1]]},
  "expect": {"nullity": {"1": 2}, "ruled": true, "ell": 0}
})"},
      {"generic-graph", "distinct principal curvatures: nullity one, rigidity hypotheses hold",
       R"({
  "name": "generic-graph",
  "analysis": "single",
  "immersion": {"builtin": "quadric-graph", "K": [[-1.5, 0.3, 1.0, 2.2, 3.1, 4.7]]},
  "grid": {"center": [0, 0, 0, 0, 0, 0], "radius": 0.0, "counts": [1, 1, 1, 1, 1, 1]},
  "nullity": {"s": [1]},
  "rigidity": {"q": 1},
  "expect": {"nullity": {"1": 1}, "rigidity_hypotheses": true}
})"},
      {"expression-graph", "a user-written graph surface with curvatures 1 and 3 at the origin",
       R"({
  "name": "expression-graph",
  "analysis": "single",
  "immersion": {
    "name": "graph",
    "variables": ["x", "y"],
    "expression": ["x", "y", "k1*x^2/2 + k2*y^2/2"],
    "constants": {"k1": 1.0, "k2": 3.0}
  },
  "grid": {"lo": [-0.1, -0.1], "hi": [0.1, 0.1], "counts": [3, 3]},
  "nullity": {"s": [1]},
  "expect": {"nullity": {"1": 1}}
})"},
      {"congruent-pair", "a surface and a rigid motion of it",
       R"({
  "name": "congruent-pair",
  "analysis": "pair",
  "left": {"builtin": "quadric-graph", "K": [[1.0, 2.0], [0.5, -1.0]]},
  "right": {"builtin": "rigid-motion", "of": {"builtin": "quadric-graph", "K": [[1.0, 2.0], [0.5, -1.0]]},
            "rotation": [[0.6, -0.8, 0, 0], [0.8, 0.6, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
            "translation": [1.0, 0.0, -1.0, 2.0]},
  "grid": {"lo": [-0.1, -0.1], "hi": [0.1, 0.1], "counts": [3, 3]},
  "expect": {"branch": "nondegenerate", "D_is_TM": true, "ranks": {"L": 2, "gamma": 0}}
})"},
      {"flat-pair", "a 3-plane in R^4 against a cylinder over a circle",
       R"({
  "name": "flat-pair",
  "analysis": "pair",
  "left": {"builtin": "plane", "n": 3, "m": 4},
  "right": {"builtin": "cylinder", "n": 3},
  "grid": {"lo": [-0.2, -0.2, -0.2], "hi": [0.2, 0.2, 0.2], "counts": [3, 3, 3]},
  "expect": {"branch": "nondegenerate", "ranks": {"L": 0, "D": 2}}
})"},
      {"generated-degenerate-pair", "light-cone slice of a cylinder pair, checked by the degenerate branch",
       R"({
  "name": "generated-degenerate-pair",
  "analysis": "generate",
  "F_prime": {"builtin": "generated-pair", "part": "F_prime"},
  "F_hat": {"builtin": "generated-pair", "part": "F_hat"},
  "grid": {"lo": [0.5, -0.2, 0.0, 0.0], "hi": [1.5, 0.2, 0.0, 0.0], "counts": [3, 3, 1, 1]},
  "slice": {"axis": 0, "lo": -4.0, "hi": -0.25},
  "expect": {"root": [0.0, -2.0, 0.0, 0.0, 0.0], "branch": "degenerate", "ranks": {"L": 2, "D": 3}}
})"},
      {"torus-extension", "ruled extension of a pair of flat tori with negative controls",
       R"({
  "name": "torus-extension",
  "analysis": "extend",
  "left": {"builtin": "flat-torus", "a": 1.0, "b": 2.0},
  "right": {"builtin": "flat-torus", "a": 0.7, "b": 2.0},
  "grid": {"lo": [-0.1, -0.1], "hi": [0.1, 0.1], "counts": [3, 3]},
  "negative_controls": true,
  "expect": {"branch": "nondegenerate", "ranks": {"L": 1, "D": 1}}
})"},
      {"congruent-extension", "extension of a congruent pair: Delta is all of TM plus L",
       R"({
  "name": "congruent-extension",
  "analysis": "extend",
  "left": {"builtin": "quadric-graph", "K": [[1.0, 2.0], [0.5, -1.0]]},
  "right": {"builtin": "rigid-motion", "of": {"builtin": "quadric-graph", "K": [[1.0, 2.0], [0.5, -1.0]]},
            "rotation": [[0.6, -0.8, 0, 0], [0.8, 0.6, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
            "translation": [1.0, 0.0, -1.0, 2.0]},
  "grid": {"lo": [-0.1, -0.1], "hi": [0.1, 0.1], "counts": [3, 3]},
  "expect": {"branch": "nondegenerate", "D_is_TM": true}
})"},
  };
  return g;
}

const GalleryManifest& gallery_entry(const std::string& name) {
  for (const GalleryManifest& m : gallery())
    if (m.name == name) return m;
  throw ManifestError("unknown gallery manifest '" + name + "' (see `cdef gallery list`)");
}

} // namespace cdef

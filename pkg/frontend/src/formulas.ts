// Rendered formula text per formula_id. Each formula is a list of spans;
// spans carrying a symbol participate in bidirectional math-vis linking
// (the symbol values match the trace's step symbols).

export interface FormulaSpan {
  text: string;
  symbol?: string;
}

export type Formula = FormulaSpan[];

export const FORMULAS: Record<string, Formula> = {
  gcn_conv: [
    { text: "x'ᵢ = ReLU( ", symbol: "activation" },
    { text: "W", symbol: "W" },
    { text: " Σ_{j∈N(i)∪{i}} " },
    { text: "1/√(dᵢ·dⱼ)", symbol: "coeff" },
    { text: " · " },
    { text: "xⱼ", symbol: "x_j" },
    { text: " + " },
    { text: "b", symbol: "b" },
    { text: " )" },
  ],
  gat_score_1: [
    { text: "eᵢⱼ", symbol: "e_ij" },
    { text: " = LeakyReLU( " },
    { text: "aᵀ", symbol: "a" },
    { text: " [ " },
    { text: "W", symbol: "W" },
    { text: "xᵢ ∥ " },
    { text: "W", symbol: "W" },
    { text: "xⱼ", symbol: "x_j" },
    { text: " ] )" },
  ],
  gat_score_2: [
    { text: "αᵢⱼ", symbol: "alpha" },
    { text: " = exp(" },
    { text: "eᵢⱼ", symbol: "e_ij" },
    { text: ") / Σ_{k∈N(i)∪{i}} exp(" },
    { text: "eᵢₖ", symbol: "e_ij" },
    { text: ")" },
  ],
  gat_score_3: [
    { text: "x'ᵢ = ReLU( Σ_{j∈N(i)∪{i}} ", symbol: "activation" },
    { text: "αᵢⱼ", symbol: "alpha" },
    { text: " · " },
    { text: "W", symbol: "W" },
    { text: "xⱼ", symbol: "Wx" },
    { text: " )" },
  ],
  sage_conv: [
    { text: "x'ᵢ = ReLU( ", symbol: "activation" },
    { text: "W₁", symbol: "W" },
    { text: "xᵢ + " },
    { text: "W₂", symbol: "W" },
    { text: " · " },
    { text: "mean_{j∈S(i)}", symbol: "mean" },
    { text: " " },
    { text: "xⱼ", symbol: "x_j" },
    { text: " + " },
    { text: "b", symbol: "b" },
    { text: " )" },
  ],
  pool_mean: [
    { text: "h", symbol: "pool" },
    { text: " = (1/N) Σᵢ " },
    { text: "xᵢ", symbol: "x_j" },
  ],
  mlp_affine: [
    { text: "y", symbol: "logits" },
    { text: " = " },
    { text: "W", symbol: "W" },
    { text: "x", symbol: "x_j" },
    { text: " + " },
    { text: "b", symbol: "b" },
  ],
  link_dot: [
    { text: "score", symbol: "dot" },
    { text: " = " },
    { text: "zᵤ", symbol: "x_j" },
    { text: " · " },
    { text: "zᵥ", symbol: "x_j" },
    { text: " ;  p = σ(score)" },
  ],
};

/** GAT layers display the full three-formula attention breakdown. */
export function formulasForLayer(formulaId: string): Formula[] {
  if (formulaId === "gat_score_1") {
    return [FORMULAS.gat_score_1, FORMULAS.gat_score_2, FORMULAS.gat_score_3];
  }
  const formula = FORMULAS[formulaId];
  return formula ? [formula] : [];
}

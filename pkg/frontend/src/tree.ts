/** Deterministic head attachment producing valid dependency trees.
 *
 * A full statistical parser is not available in this runtime, so heads are
 * assigned by part-of-speech heuristics under one hard guarantee: every
 * non-root token attaches strictly root-ward (its head is closer to the
 * root position than itself), which makes cycles impossible by
 * construction. Relations are typed from the (dependent, head) POS pair.
 */

import { AnnotatedToken, TaggedSentence } from "./types";
import { stem } from "./stem";

const CONTENT = new Set(["NOUN", "PROPN", "VERB", "ADJ", "NUM"]);

function rootIndex(upos: string[]): number {
  for (const want of ["VERB", "AUX", "NOUN", "PROPN"]) {
    const i = upos.indexOf(want);
    if (i >= 0) return i;
  }
  return 0;
}

function relationFor(dep: string, head: string): string {
  switch (dep) {
    case "DET":
      return "det";
    case "ADJ":
      return "amod";
    case "ADP":
      return "case";
    case "ADV":
      return "advmod";
    case "AUX":
      return "aux";
    case "CCONJ":
    case "SCONJ":
      return "cc";
    case "PART":
      return "mark";
    case "PRON":
      return head === "VERB" ? "nsubj" : "nmod";
    case "NUM":
      return "nummod";
    case "NOUN":
    case "PROPN":
      if (head === "VERB" || head === "AUX") return "obj";
      return "compound";
    case "VERB":
      return head === "VERB" ? "conj" : "acl";
    default:
      return "dep";
  }
}

/** Nearest index j with |j - root| < |i - root| satisfying pred, else -1. */
function nearestRootward(i: number, root: number, ok: (j: number) => boolean): number {
  const step = i > root ? -1 : 1;
  for (let j = i + step; step > 0 ? j <= root : j >= root; j += step) {
    if (ok(j)) return j;
  }
  return -1;
}

export function attach(sentence: TaggedSentence): AnnotatedToken[] {
  const { forms, upos } = sentence;
  const n = forms.length;
  if (n === 0) return [];
  const root = rootIndex(upos);
  const heads = new Array<number>(n).fill(0);
  const rels = new Array<string>(n).fill("root");
  for (let i = 0; i < n; i++) {
    if (i === root) continue;
    // content words chain along the nearest root-ward content word;
    // function words lean on it as well
    let h = nearestRootward(i, root, (j) => CONTENT.has(upos[j]));
    if (h < 0) h = root;
    heads[i] = h + 1; // 1-based
    rels[i] = relationFor(upos[i], upos[h]);
  }
  return forms.map((form, i) => ({
    form,
    stem: stem(form),
    upos: upos[i],
    head: heads[i],
    deprel: rels[i],
  }));
}

/** Mirror of the consumer-side invariants; throws on violation. */
export function validateTree(tokens: AnnotatedToken[]): void {
  const n = tokens.length;
  if (n === 0) throw new Error("empty sentence");
  const roots = tokens.filter((t) => t.head === 0).length;
  if (roots !== 1) throw new Error(`expected exactly one root, found ${roots}`);
  tokens.forEach((t, i) => {
    if (t.head < 0 || t.head > n) throw new Error(`head ${t.head} of token ${i + 1} out of range`);
  });
  for (let start = 0; start < n; start++) {
    const seen = new Set<number>();
    let node = start;
    while (tokens[node].head !== 0) {
      if (seen.has(node)) throw new Error(`cycle through token ${start + 1}`);
      seen.add(node);
      node = tokens[node].head - 1;
    }
  }
}

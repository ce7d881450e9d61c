/** Self-contained fallback tagger: regex sentence splitting plus a small
 * lexicon with suffix rules. No external model required.
 */

import { Tagger, TaggedSentence } from "../types";
import { DIGIT_TOKEN, normalize } from "../tokenize";

const LEXICON: Record<string, string> = {
  a: "DET", an: "DET", the: "DET", this: "DET", these: "DET", that: "DET",
  we: "PRON", it: "PRON", they: "PRON", i: "PRON", you: "PRON",
  of: "ADP", for: "ADP", on: "ADP", in: "ADP", with: "ADP", from: "ADP",
  at: "ADP", by: "ADP", over: "ADP", under: "ADP", into: "ADP",
  and: "CCONJ", or: "CCONJ", but: "CCONJ",
  is: "AUX", are: "AUX", was: "AUX", were: "AUX", be: "AUX", been: "AUX",
  has: "AUX", have: "AUX", had: "AUX", will: "AUX", can: "AUX", may: "AUX",
  to: "PART", not: "PART",
  when: "SCONJ", while: "SCONJ", because: "SCONJ", if: "SCONJ",
  very: "ADV", also: "ADV", directly: "ADV", quickly: "ADV",
};

function posOf(token: string): string {
  if (token === DIGIT_TOKEN) return "NUM";
  const hit = LEXICON[token];
  if (hit) return hit;
  if (token.endsWith("ly")) return "ADV";
  if (/(ing|ed|ize|izes|ifies|ates)$/.test(token)) return "VERB";
  if (/(al|ive|ous|ic|able|ible|ful|less)$/.test(token)) return "ADJ";
  return "NOUN";
}

export class BuiltinTagger implements Tagger {
  readonly name: string;

  constructor(version: string) {
    this.name = `builtin@${version}`;
  }

  tag(text: string): TaggedSentence[] {
    const out: TaggedSentence[] = [];
    for (const raw of text.split(/(?<=[.!?])\s+|\n+/)) {
      const forms = normalize(raw);
      if (forms.length === 0) continue;
      out.push({ forms, upos: forms.map(posOf) });
    }
    return out;
  }
}

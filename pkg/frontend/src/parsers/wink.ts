/** Sentence splitting and POS tagging via wink-nlp's English model.
 *
 * Token forms always come from the shared tokenizer; wink tags are mapped
 * onto them by character offset (a wink token may cover several normalized
 * tokens, e.g. hyphenated compounds).
 */

import winkNLP, { ItemSentence } from "wink-nlp";
import model from "wink-eng-lite-web-model";
import { Tagger, TaggedSentence } from "../types";
import { DIGIT_TOKEN, normalizeWithSpans } from "../tokenize";

const nlp = winkNLP(model);
const its = nlp.its;

// eslint-disable-next-line @typescript-eslint/no-var-requires
const WINK_VERSION: string = require("wink-nlp/package.json").version;

interface WinkSpan {
  start: number;
  end: number;
  pos: string;
}

function winkSpans(sentText: string, values: string[], tags: string[]): WinkSpan[] {
  const spans: WinkSpan[] = [];
  let cursor = 0;
  for (let i = 0; i < values.length; i++) {
    const at = sentText.indexOf(values[i], cursor);
    if (at < 0) continue; // normalized quotes etc.: skip, neighbours cover it
    spans.push({ start: at, end: at + values[i].length, pos: tags[i] });
    cursor = at + values[i].length;
  }
  return spans;
}

export class WinkTagger implements Tagger {
  readonly name = `wink-nlp@${WINK_VERSION}`;

  tag(text: string): TaggedSentence[] {
    const out: TaggedSentence[] = [];
    const doc = nlp.readDoc(text);
    doc.sentences().each((sentence: ItemSentence) => {
      const sentText = sentence.out();
      const spans = winkSpans(sentText,
                              sentence.tokens().out() as string[],
                              sentence.tokens().out(its.pos) as string[]);
      const forms: string[] = [];
      const upos: string[] = [];
      for (const tok of normalizeWithSpans(sentText)) {
        forms.push(tok.token);
        if (tok.token === DIGIT_TOKEN) {
          upos.push("NUM");
          continue;
        }
        const covering = spans.find((s) => tok.start >= s.start && tok.start < s.end);
        upos.push(covering ? covering.pos : "NOUN");
      }
      if (forms.length > 0) out.push({ forms, upos });
    });
    return out;
  }
}

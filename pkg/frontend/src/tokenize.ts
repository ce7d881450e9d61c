/** Tokenizer matching the training pipeline's normalize():
 * lower-case, split on whitespace/punctuation boundaries, every maximal
 * ASCII digit run replaced by the <digit> sentinel (kept atomic so the
 * function is idempotent over its own output).
 * Cross-language equality is pinned by tests/fixtures/tokens_golden.json.
 */

export const DIGIT_TOKEN = "<digit>";

const PIECE_RE = /<digit>|[\p{L}\p{N}]+/gu;
// letter-ish runs exclude decimal digits of every script, mirroring the
// reference tokenizer; ASCII digit runs match the first alternative
const PART_RE = /[0-9]+|[\p{L}\p{Nl}\p{No}]+/gu;

export interface Span {
  token: string;
  /** start offset of the piece this token came from, in the source text */
  start: number;
}

export function normalizeWithSpans(text: string): Span[] {
  const out: Span[] = [];
  const lower = text.toLowerCase();
  for (const piece of lower.matchAll(PIECE_RE)) {
    if (piece[0] === DIGIT_TOKEN) {
      out.push({ token: DIGIT_TOKEN, start: piece.index! });
      continue;
    }
    for (const part of piece[0].matchAll(PART_RE)) {
      const isDigits = part[0].charCodeAt(0) >= 48 && part[0].charCodeAt(0) <= 57;
      out.push({
        token: isDigits ? DIGIT_TOKEN : part[0],
        start: piece.index! + part.index!,
      });
    }
  }
  return out;
}

export function normalize(text: string): string[] {
  return normalizeWithSpans(text).map((s) => s.token);
}

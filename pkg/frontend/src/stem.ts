/** Porter suffix-stripping stemmer, algorithm-identical to the training
 * pipeline's implementation (classic 1980 rules with the customary bli/logi
 * departures). Conformance is pinned by tests/fixtures/stems_golden.txt.
 */

const VOWELS = "aeiou";

function isCons(word: string, i: number): boolean {
  const ch = word[i];
  if (VOWELS.includes(ch)) return false;
  if (ch === "y") return i === 0 || !isCons(word, i - 1);
  return true;
}

function measure(stemStr: string): number {
  let m = 0;
  let i = 0;
  const n = stemStr.length;
  while (i < n && isCons(stemStr, i)) i++;
  while (i < n) {
    while (i < n && !isCons(stemStr, i)) i++;
    if (i >= n) break;
    m++;
    while (i < n && isCons(stemStr, i)) i++;
  }
  return m;
}

function hasVowel(stemStr: string): boolean {
  for (let i = 0; i < stemStr.length; i++) if (!isCons(stemStr, i)) return true;
  return false;
}

function endsDoubleCons(word: string): boolean {
  const n = word.length;
  return n >= 2 && word[n - 1] === word[n - 2] && isCons(word, n - 1);
}

function endsCvc(word: string): boolean {
  const n = word.length;
  if (n < 3) return false;
  if (!(isCons(word, n - 3) && !isCons(word, n - 2) && isCons(word, n - 1))) return false;
  return !"wxy".includes(word[n - 1]);
}

function replaceSuffix(word: string, suffix: string, repl: string, minMeasure: number): string | null {
  const stemStr = word.slice(0, word.length - suffix.length);
  return measure(stemStr) > minMeasure ? stemStr + repl : null;
}

const STEP2: [string, string][] = [
  ["ational", "ate"], ["tional", "tion"], ["enci", "ence"], ["anci", "ance"],
  ["izer", "ize"], ["bli", "ble"], ["alli", "al"], ["entli", "ent"],
  ["eli", "e"], ["ousli", "ous"], ["ization", "ize"], ["ation", "ate"],
  ["ator", "ate"], ["alism", "al"], ["iveness", "ive"], ["fulness", "ful"],
  ["ousness", "ous"], ["aliti", "al"], ["iviti", "ive"], ["biliti", "ble"],
  ["logi", "log"],
];

const STEP3: [string, string][] = [
  ["icate", "ic"], ["ative", ""], ["alize", "al"], ["iciti", "ic"],
  ["ical", "ic"], ["ful", ""], ["ness", ""],
];

const STEP4 = [
  "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
  "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
];

function step1ab(word: string): string {
  if (word.endsWith("s")) {
    if (word.endsWith("sses")) word = word.slice(0, -2);
    else if (word.endsWith("ies")) word = word.slice(0, -2);
    else if (!word.endsWith("ss")) word = word.slice(0, -1);
  }
  if (word.endsWith("eed")) {
    if (measure(word.slice(0, -3)) > 0) word = word.slice(0, -1);
    return word;
  }
  let dropped: string | null = null;
  if (word.endsWith("ed") && hasVowel(word.slice(0, -2))) dropped = word.slice(0, -2);
  else if (word.endsWith("ing") && hasVowel(word.slice(0, -3))) dropped = word.slice(0, -3);
  if (dropped === null) return word;
  word = dropped;
  if (word.endsWith("at") || word.endsWith("bl") || word.endsWith("iz")) return word + "e";
  if (endsDoubleCons(word) && !"lsz".includes(word[word.length - 1])) return word.slice(0, -1);
  if (measure(word) === 1 && endsCvc(word)) return word + "e";
  return word;
}

function step1c(word: string): string {
  if (word.endsWith("y") && hasVowel(word.slice(0, -1))) return word.slice(0, -1) + "i";
  return word;
}

function stepMapped(word: string, rules: [string, string][]): string {
  for (const [suffix, repl] of rules) {
    if (word.endsWith(suffix)) return replaceSuffix(word, suffix, repl, 0) ?? word;
  }
  return word;
}

function step4(word: string): string {
  for (const suffix of STEP4) {
    if (word.endsWith(suffix)) {
      const stemStr = word.slice(0, word.length - suffix.length);
      if (measure(stemStr) > 1 &&
          (suffix !== "ion" || (stemStr.length > 0 && "st".includes(stemStr[stemStr.length - 1])))) {
        return stemStr;
      }
      return word;
    }
  }
  return word;
}

function step5(word: string): string {
  if (word.endsWith("e")) {
    const stemStr = word.slice(0, -1);
    const m = measure(stemStr);
    if (m > 1 || (m === 1 && !endsCvc(stemStr))) word = stemStr;
  }
  if (endsDoubleCons(word) && word.endsWith("l") && measure(word.slice(0, -1)) > 1) {
    word = word.slice(0, -1);
  }
  return word;
}

export function stem(word: string): string {
  word = word.toLowerCase();
  if (word.length <= 2) return word;
  word = step1ab(word);
  word = step1c(word);
  word = stepMapped(word, STEP2);
  word = stepMapped(word, STEP3);
  word = step4(word);
  word = step5(word);
  return word;
}

/** Raw-JSONL to annotated-JSONL bridge.
 *
 * Title and abstract are joined with a period so the sentence splitter
 * sees a boundary between them; every emitted tree is validated before
 * writing; documents that fail land in the manifest, never in the output.
 */

import { AnnotatedDocument, PreprocessManifest, RawDocument, Tagger } from "./types";
import { attach, validateTree } from "./tree";

export function joinTitleAbstract(doc: RawDocument): string {
  const title = doc.title.trim();
  const abstract = doc.abstract.trim();
  if (!title) return abstract;
  if (!abstract) return title;
  const sep = /[.!?]$/.test(title) ? " " : ". ";
  return title + sep + abstract;
}

export function annotateDocument(doc: RawDocument, tagger: Tagger): AnnotatedDocument {
  if (!doc.id) throw new Error("document missing id");
  const text = joinTitleAbstract(doc);
  const sentences = tagger.tag(text).map((s) => ({ tokens: attach(s) }));
  for (const sentence of sentences) validateTree(sentence.tokens);
  return { id: doc.id, sentences, keyphrases: doc.keyphrases ?? [] };
}

export interface AnnotateResult {
  documents: AnnotatedDocument[];
  manifest: PreprocessManifest;
}

export function annotateCorpus(rows: RawDocument[], tagger: Tagger,
                               inputPath = "", outputPath = ""): AnnotateResult {
  const documents: AnnotatedDocument[] = [];
  const failures: { id: string; error: string }[] = [];
  for (const row of rows) {
    try {
      documents.push(annotateDocument(row, tagger));
    } catch (err) {
      failures.push({ id: row.id ?? "<missing id>", error: String(err) });
    }
  }
  const manifest: PreprocessManifest = {
    parser: tagger.name,
    input: inputPath,
    output: outputPath,
    documents_in: rows.length,
    documents_out: documents.length,
    failures,
  };
  return { documents, manifest };
}

export function parseRawJsonl(text: string): RawDocument[] {
  const rows: RawDocument[] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    let obj: unknown;
    try {
      obj = JSON.parse(line);
    } catch (err) {
      throw new Error(`line ${i + 1}: malformed JSON (${err})`);
    }
    const doc = obj as RawDocument;
    for (const key of ["id", "title", "abstract", "keyphrases"] as const) {
      if (!(key in (obj as object))) throw new Error(`line ${i + 1}: missing field '${key}'`);
    }
    rows.push(doc);
  }
  return rows;
}

export function toJsonl(documents: AnnotatedDocument[]): string {
  return documents.map((d) => JSON.stringify(d)).join("\n") + (documents.length ? "\n" : "");
}

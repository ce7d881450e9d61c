/** Schema of the annotated-JSONL contract consumed by the training pipeline. */

export interface RawDocument {
  id: string;
  title: string;
  abstract: string;
  keyphrases: string[];
}

export interface AnnotatedToken {
  form: string;
  stem: string;
  upos: string;
  /** 1-based head within the sentence; 0 marks the root. */
  head: number;
  deprel: string;
}

export interface AnnotatedSentence {
  tokens: AnnotatedToken[];
}

export interface AnnotatedDocument {
  id: string;
  sentences: AnnotatedSentence[];
  keyphrases: string[];
}

/** A sentence after tagging, before head attachment. */
export interface TaggedSentence {
  forms: string[];
  upos: string[];
}

/** Sentence splitting plus POS tagging over the shared tokenizer's output. */
export interface Tagger {
  readonly name: string;
  tag(text: string): TaggedSentence[];
}

export interface PreprocessManifest {
  parser: string;
  input: string;
  output: string;
  documents_in: number;
  documents_out: number;
  failures: { id: string; error: string }[];
}

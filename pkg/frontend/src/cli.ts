#!/usr/bin/env node
/** CLI: raw JSONL in, annotated JSONL + failure manifest out. */

import * as fs from "fs";
import * as path from "path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { annotateCorpus, parseRawJsonl, toJsonl } from "./annotate";
import { BuiltinTagger } from "./parsers/builtin";
import { Tagger } from "./types";

// eslint-disable-next-line @typescript-eslint/no-var-requires
const PKG_VERSION: string = require("../package.json").version;

function makeTagger(name: string): Tagger {
  if (name === "wink") {
    // lazy import: the model package is only needed for this parser
    // eslint-disable-next-line @typescript-eslint/no-var-requires
    const { WinkTagger } = require("./parsers/wink");
    return new WinkTagger();
  }
  if (name === "builtin") return new BuiltinTagger(PKG_VERSION);
  throw new Error(`unknown parser '${name}' (expected wink or builtin)`);
}

export function run(argv: string[]): number {
  const args = yargs(argv)
    .scriptName("kp-annotate")
    .usage("$0 --input raw.jsonl --output annotated.jsonl [options]")
    .option("input", { type: "string", demandOption: true, describe: "raw JSONL path" })
    .option("output", { type: "string", demandOption: true, describe: "annotated JSONL path" })
    .option("parser", { type: "string", default: "wink", describe: "wink | builtin" })
    .option("manifest", { type: "string", describe: "manifest path (default: <output>.manifest.json)" })
    .strict()
    .parseSync();

  if (!fs.existsSync(args.input)) {
    console.error(`input does not exist: ${args.input}`);
    return 2;
  }
  let tagger: Tagger;
  try {
    tagger = makeTagger(args.parser);
  } catch (err) {
    console.error(String(err));
    return 1;
  }
  const rows = parseRawJsonl(fs.readFileSync(args.input, "utf-8"));
  const { documents, manifest } = annotateCorpus(rows, tagger, args.input, args.output);
  fs.mkdirSync(path.dirname(path.resolve(args.output)), { recursive: true });
  fs.writeFileSync(args.output, toJsonl(documents));
  const manifestPath = args.manifest ?? `${args.output}.manifest.json`;
  fs.writeFileSync(manifestPath, JSON.stringify(manifest, null, 2) + "\n");
  console.log(`annotated ${manifest.documents_out}/${manifest.documents_in} documents ` +
              `with ${manifest.parser} -> ${args.output}`);
  if (manifest.failures.length > 0) {
    console.error(`${manifest.failures.length} document(s) failed; see ${manifestPath}`);
  }
  return 0;
}

if (require.main === module) {
  process.exit(run(hideBin(process.argv)));
}

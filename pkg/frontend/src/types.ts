// Shapes of the JSON artifacts served by the edit API.

export interface PhraseRef {
  head: number;
  lemma: string;
  modifiers: number[];
}

export interface AlterEntry {
  source: PhraseRef;
  verdict: 'SUBSTITUTED' | 'MODIFIER_CHANGED';
  target: PhraseRef;
}

export interface KeepEntry {
  source: PhraseRef;
  verdict: 'IDENTICAL' | 'DELETED';
}

export interface PlanJson {
  schema_version: number;
  source_tokens: string[];
  target_tokens: string[];
  alter: AlterEntry[];
  keep: KeepEntry[];
  inserted: PhraseRef[];
  alignment?: [number, number][];
}

export interface RunManifest {
  run_id: string;
  target_caption: string;
  config: Record<string, unknown>;
  created: string;
  complete: boolean;
}

export interface SessionHistory {
  id: string;
  source_caption: string;
  created: string;
  image_url: string;
  runs: RunManifest[];
}

export interface ArtifactManifest {
  run: RunManifest;
  artifacts: Record<string, string>;
}

export const SUPPORTED_PLAN_SCHEMA = 1;

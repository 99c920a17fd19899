// Shapes of the JSON the API serves. Field names match the server
// exactly; nothing here is invented client-side.

export interface Source {
  regulation: string;
  clause: string;
}

export interface Requirement {
  id: string;
  action_verb: string;
  object: string | null;
  complement: string;
  text: string;
  goal_id: number;
  sources: Source[];
  keywords: string[];
  merged_from: string[];
  reconstructed: boolean;
}

export interface Goal {
  id: number;
  name: string;
  description: string;
  expected_requirement_count: number | null;
}

export interface Taxonomy {
  version: string;
  goals: Goal[];
  requirements: Requirement[];
}

export interface Issue {
  source: string;
  external_id: string;
  url: string | null;
  title: string;
  description: string;
  components: string[];
  status: string;
  created_at: string;
  resolved_at: string | null;
  comment_count: number;
}

export interface IssuePage {
  name: string;
  total: number;
  offset: number;
  limit: number;
  issues: Issue[];
}

export interface Session {
  session_id: string;
  corpus_name: string;
  coders: string[];
  plan: { kind: string; [key: string]: unknown };
  assignments: Record<string, string[]>;
  issue_keys: string[];
}

/** Session detail: the session plus issue_key -> coder -> sorted labels. */
export interface SessionDetail extends Session {
  labels: Record<string, Record<string, string[]>>;
}

export interface LabelRecord {
  session_id: string;
  coder_id: string;
  issue_key: string;
  labels: string[];
  annotated_at: string;
  note?: string;
}

export interface Disagreement {
  issue_key: string;
  by_coder: Record<string, string[]>;
  status: 'open' | 'resolved';
}

export interface Resolution {
  issue_key: string;
  final_labels: string[];
  method: 'combined' | 'reclassified';
  notes: string;
}

export interface IrrResult {
  metric: string;
  value: number;
  n_items: number;
  n_coders: number;
  distance?: string;
  excluded_items: number;
}

export interface GoldExport {
  name: string;
  entries: Record<string, string[]>;
}

export interface Health {
  status: string;
  read_only: boolean;
}

// Payload shapes mirrored from the session service. The console renders
// these values verbatim and performs no objective math of its own.

export interface Objectives {
  perfq: number;
  reliability: number;
  cost: number;
  pas: number;
}

export type NodeStatus = 'idle' | 'running' | 'done' | 'failed';

export interface TreeNode {
  id: string;
  parent: string | null;
  depth: number;
  prefix_len: number;
  nps: number;
  cluster_count: number;
  medoid_labels: string[];
  children: Record<string, string>;
  status: NodeStatus;
  generation: number;
  of: number;
}

export interface TreePayload {
  session: string;
  nodes: TreeNode[];
}

export interface Solution {
  chromosome: string[][];
  objectives: Objectives;
  cluster: number;
  medoid: boolean;
  label: string;
}

export interface ClusterRow {
  id: number;
  size: number;
  label: string;
  label_words: string[];
  medoid_objectives: Objectives;
  medoid_chromosome: string[][];
  child: string | null;
}

export interface ArchiveSolution {
  chromosome: string[][];
  objectives: Objectives;
}

export interface NodeView {
  id: string;
  parent: string | null;
  depth: number;
  status: NodeStatus;
  prefix_len: number;
  prefix: string[][];
  generation: number;
  of: number;
  error: string | null;
  children: Record<string, string>;
  max_depth: number;
  nps?: number;
  front?: Solution[];
  scope?: string;
  silhouette?: number;
  clusters?: ClusterRow[];
  archive_solutions?: ArchiveSolution[];
}

export interface LandscapePayload {
  node: string;
  points: [number, number][];
  explained_variance: number[];
  kde: {
    grid: number[][];
    extent: [number, number, number, number];
    bandwidth: number;
    grid_size: number;
  };
}

export const OBJECTIVE_KEYS: (keyof Objectives)[] = [
  'perfq',
  'reliability',
  'cost',
  'pas',
];

export const OBJECTIVE_TITLES: Record<keyof Objectives, string> = {
  perfq: 'perfQ',
  reliability: 'reliability',
  cost: 'cost',
  pas: 'antipatterns',
};

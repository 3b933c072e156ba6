// Typed client for the latebind JSON API. Every state change the console
// performs goes through this module, so the whole UI is reconstructable
// from API reads plus the local token store.

export type ContentKind =
  | "static"
  | "self-destruct"
  | "continuous-edit"
  | "dashboard"
  | "web-reference";

export interface PolicyInput {
  absolute_expiry?: number;
  after_first_view?: number;
  max_views?: number;
}

export interface BindingInput {
  type: "http-json" | "snapshot";
  url: string;
  path?: string;
  template?: string;
  provider?: string;
  crop?: number[];
  interval: number;
}

export interface CreateRequest {
  kind: ContentKind;
  text?: string;
  binding?: BindingInput;
  policy?: PolicyInput;
  kt_enabled?: boolean;
  include_alt?: boolean;
  alt_text?: string;
}

export interface CreatedContent {
  content_id: string;
  edit_token: string;
  image_urls: string[];
  html_snippet: string;
}

export interface PatchResult {
  content_id: string;
  revision: number;
  image_urls: string[];
  html_snippet: string;
}

export interface Verdict {
  status: "active" | "expired";
  reason: string | null;
}

export interface StatusDoc {
  content_id: string;
  kind: ContentKind;
  status: "live" | "expired" | "deleted";
  policy: { absolute_expiry: number | null; after_first_view: number | null; max_views: number | null };
  view_count: number;
  first_viewed_at: number | null;
  last_viewed_at: number | null;
  revision_count: number;
  segment_count: number;
  kt_enabled: boolean;
  verdict: Verdict;
  created_at: number;
  binding: (BindingInput & { last_refreshed_at: number | null; last_error: string | null }) | null;
  token_status: "active" | "revoked" | null;
}

export interface ScrubSpan {
  start: number;
  end: number;
  category: string;
  matched_text: string;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly reason: string,
  ) {
    super(`${status}: ${reason}`);
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let reason = response.statusText || "request failed";
  try {
    const body = (await response.json()) as { error?: string; reason?: string };
    reason = body.reason ?? body.error ?? reason;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, reason);
}

export class ApiClient {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    token?: string | null,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    // tokens only ever travel to the configured service origin
    if (token) headers["Authorization"] = `Bearer ${token}`;
    const response = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/healthz");
  }

  createContent(request: CreateRequest): Promise<CreatedContent> {
    return this.request("POST", "/api/contents", request);
  }

  status(contentId: string, token: string): Promise<StatusDoc> {
    return this.request("GET", `/api/contents/${contentId}`, undefined, token);
  }

  patchText(contentId: string, token: string, text: string): Promise<PatchResult> {
    return this.request("PATCH", `/api/contents/${contentId}`, { text }, token);
  }

  destroy(contentId: string, token: string): Promise<{ status: string }> {
    return this.request("DELETE", `/api/contents/${contentId}`, undefined, token);
  }

  registerBinding(contentId: string, token: string, binding: BindingInput): Promise<unknown> {
    return this.request("POST", "/api/bindings", { content_id: contentId, binding }, token);
  }

  scrub(text: string): Promise<{ spans: ScrubSpan[]; preview: string }> {
    return this.request("POST", "/api/scrub", { text });
  }
}

public struct Vector3
{
    public double x, y, z;
}

public static class Geometry
{
    public static void Normal(Vector3 u, Vector3 v, out double wx, out double wy, out double wz)
    {
        // GMac : GetNormalToVectors
        //GMac.Bind("u.e1", "<u.x>");
        //GMac.Bind("u.e2", "<u.y>");
        //GMac.Bind("u.e3", "<u.z>");
        //GMac.Bind("v.e1", "<v.x>");
        //GMac.Bind("v.e2", "<v.y>");
        //GMac.Bind("v.e3", "<v.z>");
        //GMac.Bind("w.e1", "<wx>");
        //GMac.Bind("w.e2", "<wy>");
        //GMac.Bind("w.e3", "<wz>");
        // GMac end
    }
}
